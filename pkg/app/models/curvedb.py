"""
Target curves by Cremona label.

Bundled records ship in ``app/data/curves.json``. Anything else comes from the
LMFDB when fetching is allowed and is cached on disk, one JSON file per label.
"""
import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path

import urllib3
from urllib3.util import Retry, Timeout

from app.config import Config
from app.errors import CurveNotFoundError, InvalidInputError, RemoteDataError
from app.models.ellcurve import CurveQ, tate_conductor
from app.schemas import CURVE_DATA, CURVE_RECORD, LMFDB_RESPONSE, validate

logger = logging.getLogger(__name__)

LABEL_RE = re.compile(r"^(\d+)([a-z]+)(\d+)$")


def split_label(label):
    """'3718c1' -> (3718, 'c', 1)."""
    match = LABEL_RE.match(label)
    if not match:
        raise CurveNotFoundError(f"{label!r} is not a valid Cremona label")
    conductor, iso_class, number = match.groups()
    return int(conductor), iso_class, int(number)


@dataclass(frozen=True)
class CurveRecord:
    label: str
    a_invariants: tuple
    conductor: int

    def __post_init__(self):
        if split_label(self.label)[0] != self.conductor:
            raise InvalidInputError(f"conductor {self.conductor} does not match label {self.label}")

    @classmethod
    def from_dict(cls, data):
        validate(data, CURVE_RECORD, "curve record")
        return cls(data["label"], tuple(int(a) for a in data["a_invariants"]), int(data["conductor"]))

    @cached_property
    def curve(self):
        return CurveQ.from_ainvs(self.a_invariants)

    def check_conductor(self):
        return tate_conductor(self.curve).conductor == self.conductor

    def as_dict(self):
        return {
            "label": self.label,
            "a_invariants": [str(a) for a in self.a_invariants],
            "conductor": str(self.conductor),
        }


@dataclass(frozen=True)
class Candidates:
    records: tuple
    not_a_bad_pair: bool = False

    def as_dict(self):
        return {
            "records": [r.as_dict() for r in self.records],
            "not_a_bad_pair": self.not_a_bad_pair,
        }


def _data_file(name):
    return resources.files("app.data").joinpath(name)


@lru_cache(maxsize=None)
def bundled_records():
    data = json.loads(_data_file("curves.json").read_text(encoding="utf-8"))
    validate(data, CURVE_DATA, "bundled curve data")
    return {r["label"]: CurveRecord.from_dict(r) for r in data}


@lru_cache(maxsize=None)
def reference():
    """Pair lists, label tables and per-technique counts bundled with the package."""
    return json.loads(_data_file("reference.json").read_text(encoding="utf-8"))


def _pair_key(C1, q):
    return f"{C1},{q}"


def bad_pairs(parity):
    return [tuple(pair) for pair in reference()["bad_pairs"][parity]]


def good_pairs(parity):
    return [tuple(pair) for pair in reference()["good_pairs"][parity]]


def candidate_labels(instance):
    return reference()["candidate_labels"][instance.parity].get(_pair_key(instance.C1, instance.q), [])


def technique_row(instance):
    row = reference()["technique_rows"][instance.parity].get(_pair_key(instance.C1, instance.q))
    if row is None:
        return None
    return dict(zip(reference()["technique_columns"], row))


def missing_solutions():
    return [tuple(s) for s in reference()["missing_solutions"]]


class CurveDB:
    def __init__(self, cache_dir=None, offline=True, url_template=None, timeout=None, retries=None, http=None):
        self.cache_dir = Path(cache_dir or Config.CURVE_CACHE_DIR)
        self.offline = offline
        self.url_template = url_template or Config.LMFDB_URL_TEMPLATE
        self.timeout = Config.LMFDB_TIMEOUT if timeout is None else timeout
        self.retries = Config.LMFDB_RETRIES if retries is None else retries
        self._http = http

    @classmethod
    def from_config(cls, config):
        """From a Flask config mapping or a RunConfig."""
        if hasattr(config, "cache_dir"):
            return cls(cache_dir=config.cache_dir, offline=config.offline)
        return cls(
            cache_dir=config.get("CURVE_CACHE_DIR"),
            offline=config.get("OFFLINE", True),
            url_template=config.get("LMFDB_URL_TEMPLATE"),
            timeout=config.get("LMFDB_TIMEOUT"),
            retries=config.get("LMFDB_RETRIES"),
        )

    @property
    def http(self):
        if self._http is None:
            self._http = urllib3.PoolManager(
                retries=Retry(
                    total=self.retries,
                    backoff_factor=0.5,
                    status_forcelist=(429, 500, 502, 503, 504),
                ),
                timeout=Timeout(total=self.timeout),
            )
        return self._http

    def _cache_path(self, label):
        return self.cache_dir / "curves" / f"{label}.json"

    def read_cached(self, label):
        path = self._cache_path(label)
        if not path.exists():
            return None
        try:
            return CurveRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, ValueError) as e:
            logger.warning(f"ignoring unreadable cache entry {path}: {e}")
            return None

    def store(self, record):
        """Write a record to the cache with an atomic rename."""
        path = self._cache_path(record.label)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{record.label}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(record.as_dict(), fh, sort_keys=True)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return path

    def evict(self, label):
        self._cache_path(label).unlink(missing_ok=True)

    def cached_labels(self):
        folder = self.cache_dir / "curves"
        if not folder.is_dir():
            return []
        return sorted(p.stem for p in folder.glob("*.json") if LABEL_RE.match(p.stem))

    def fetch(self, label):
        url = self.url_template.format(label=label)
        logger.info(f"fetching {label} from {url}")
        try:
            response = self.http.request("GET", url)
        except urllib3.exceptions.HTTPError as e:
            raise RemoteDataError(f"could not fetch {label}: {e}") from e
        if response.status != 200:
            raise RemoteDataError(f"LMFDB answered {response.status} for {label}")
        try:
            payload = json.loads(response.data.decode("utf-8"))
        except ValueError as e:
            raise RemoteDataError(f"LMFDB returned malformed JSON for {label}") from e
        validate(payload, LMFDB_RESPONSE, "LMFDB response", error=RemoteDataError)
        rows = [row for row in payload["data"] if row["Clabel"] == label]
        if not rows:
            raise CurveNotFoundError(f"LMFDB has no curve labelled {label}")
        row = rows[0]
        try:
            record = CurveRecord(label, tuple(row["ainvs"]), row["conductor"])
        except InvalidInputError as e:
            raise RemoteDataError(str(e)) from e
        if not record.check_conductor():
            raise RemoteDataError(f"a-invariants fetched for {label} do not have conductor {record.conductor}")
        return record

    def lookup(self, label):
        split_label(label)
        record = bundled_records().get(label) or self.read_cached(label)
        if record is not None:
            return record
        if self.offline:
            raise CurveNotFoundError(
                f"curve {label} is neither bundled nor cached; run `curves sync {label}` "
                "without --offline to fetch it"
            )
        record = self.fetch(label)
        self.store(record)
        return record

    def sync(self, labels):
        """Fetch every label that is not already available locally."""
        records = []
        for label in labels:
            split_label(label)
            record = bundled_records().get(label) or self.read_cached(label)
            if record is None:
                if self.offline:
                    raise CurveNotFoundError(f"cannot sync {label} while offline")
                record = self.fetch(label)
                self.store(record)
            records.append(record)
        return records

    def candidates_for(self, instance):
        labels = candidate_labels(instance)
        if not labels:
            return Candidates((), not_a_bad_pair=True)
        return Candidates(tuple(self.lookup(label) for label in labels))
