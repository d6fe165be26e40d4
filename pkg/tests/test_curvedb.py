import json

import pytest
import urllib3

from app.config import RunConfig
from app.errors import ConfigError, CurveNotFoundError, InvalidInputError, RemoteDataError
from app.models.curvedb import (
    CurveDB,
    CurveRecord,
    bad_pairs,
    bundled_records,
    candidate_labels,
    good_pairs,
    reference,
    split_label,
    technique_row,
)
from app.models.instance import Instance
from app.seed import seed, wipe_cache


class FakeResponse:
    def __init__(self, status, payload):
        self.status = status
        self.data = json.dumps(payload).encode("utf-8") if not isinstance(payload, bytes) else payload


class FakeHttp:
    def __init__(self, response=None, error=None):
        self.response = response
        self.error = error
        self.urls = []

    def request(self, method, url):
        self.urls.append(url)
        if self.error is not None:
            raise self.error
        return self.response


def lmfdb_payload(label, ainvs, conductor):
    return {"data": [{"Clabel": label, "ainvs": list(ainvs), "conductor": conductor}]}


def test_split_label():
    assert split_label("3718c1") == (3718, "c", 1)
    assert split_label("3150bd1") == (3150, "bd", 1)
    with pytest.raises(CurveNotFoundError):
        split_label("not-a-label")


def test_record_conductor_must_match_label():
    with pytest.raises(InvalidInputError):
        CurveRecord("15a1", (1, 0, 1, 4, -6), 14)


def test_every_candidate_label_is_bundled():
    tables = reference()["candidate_labels"].values()
    wanted = {label for table in tables for labels in table.values() for label in labels}
    assert len(wanted) == 38
    records = bundled_records()
    assert set(records) == wanted
    assert all(record.check_conductor() for record in records.values())


def test_pair_tables():
    assert len(bad_pairs("odd")) == 9
    assert len(bad_pairs("even")) == 8
    assert (5, 19) in good_pairs("odd")
    assert not set(bad_pairs("odd")) & set(good_pairs("odd"))
    assert candidate_labels(Instance(13, 11, "odd")) == ["3718c1", "3718r1"]
    assert candidate_labels(Instance(15, 17, "odd")) == []


def test_technique_row_for_1_23():
    row = technique_row(Instance(1, 23, "odd"))
    assert list(row.values()) == [46, 1, 0, 1, 0, 0, 0, 0, 0]
    assert technique_row(Instance(5, 19, "odd")) is None


def test_offline_lookup_of_unknown_curve(tmp_path):
    db = CurveDB(tmp_path, offline=True, http=FakeHttp(error=AssertionError("no network")))
    with pytest.raises(CurveNotFoundError, match="curves sync"):
        db.lookup("11a1")


def test_candidates_for_good_pair_is_empty(tmp_path):
    candidates = CurveDB(tmp_path).candidates_for(Instance(5, 19, "odd"))
    assert candidates.records == ()
    assert candidates.not_a_bad_pair


def test_candidates_for_bundled_pair(tmp_path):
    candidates = CurveDB(tmp_path).candidates_for(Instance(1, 23, "odd"))
    assert [r.label for r in candidates.records] == ["46a1"]
    assert not candidates.not_a_bad_pair


@pytest.mark.parametrize(
    "instance, labels",
    [
        (Instance(5, 3, "odd"), ["150a1", "150b1"]),
        (Instance(13, 11, "odd"), ["3718c1", "3718r1"]),
        (Instance(7, 5, "even"), ["490g1", "490j1"]),
        (Instance(15, 7, "even"), ["3150e1", "3150i1", "3150z1", "3150bd1"]),
    ],
)
def test_candidates_resolve_offline(tmp_path, instance, labels):
    db = CurveDB(tmp_path, offline=True, http=FakeHttp(error=AssertionError("no network")))
    candidates = db.candidates_for(instance)
    assert [r.label for r in candidates.records] == labels
    assert db.lookup(labels[0]).conductor == split_label(labels[0])[0]


def test_online_lookup_fetches_and_caches(tmp_path):
    http = FakeHttp(FakeResponse(200, lmfdb_payload("14a4", (1, 0, 1, 4, -6), 14)))
    db = CurveDB(tmp_path, offline=False, http=http)
    record = db.lookup("14a4")
    assert record.a_invariants == (1, 0, 1, 4, -6)
    assert http.urls and "14a4" in http.urls[0]
    assert db.cached_labels() == ["14a4"]

    offline = CurveDB(tmp_path, offline=True)
    assert offline.lookup("14a4") == record
    offline.evict("14a4")
    assert offline.read_cached("14a4") is None


def test_fetched_curve_with_wrong_conductor_is_rejected(tmp_path):
    http = FakeHttp(FakeResponse(200, lmfdb_payload("15a1", (1, 0, 1, 4, -6), 15)))
    db = CurveDB(tmp_path, offline=False, http=http)
    with pytest.raises(RemoteDataError):
        db.lookup("15a1")
    assert db.cached_labels() == []


@pytest.mark.parametrize(
    "http",
    [
        FakeHttp(FakeResponse(503, {})),
        FakeHttp(FakeResponse(200, b"<html>")),
        FakeHttp(FakeResponse(200, {"rows": []})),
        FakeHttp(error=urllib3.exceptions.MaxRetryError(None, "url")),
    ],
)
def test_remote_failures(tmp_path, http):
    with pytest.raises(RemoteDataError):
        CurveDB(tmp_path, offline=False, http=http).fetch("90a1")


def test_missing_label_on_lmfdb(tmp_path):
    http = FakeHttp(FakeResponse(200, {"data": []}))
    with pytest.raises(CurveNotFoundError):
        CurveDB(tmp_path, offline=False, http=http).fetch("90a1")


def test_unreadable_cache_entry_is_ignored(tmp_path):
    db = CurveDB(tmp_path)
    path = tmp_path / "curves" / "90a1.json"
    path.parent.mkdir(parents=True)
    path.write_text("{broken", encoding="utf-8")
    assert db.read_cached("90a1") is None


def test_sync_skips_local_curves(tmp_path):
    http = FakeHttp(error=AssertionError("no network"))
    records = CurveDB(tmp_path, offline=False, http=http).sync(["14a1", "46a1"])
    assert [r.label for r in records] == ["14a1", "46a1"]
    assert http.urls == []


def test_run_config_layers(tmp_path, monkeypatch):
    monkeypatch.delenv("NAGELL_CONFIG", raising=False)
    monkeypatch.delenv("NAGELL_OFFLINE", raising=False)
    path = tmp_path / "run.yaml"
    path.write_text("p_max: 97\nseed: 5\npairs: [[1, 7]]\n", encoding="utf-8")
    config = RunConfig.load(path, seed=9)
    assert config.p_max == 97
    assert config.seed == 9
    assert config.pairs == ((1, 7),)


@pytest.mark.parametrize(
    "text",
    ["p_max: [", "- 1\n- 2\n", "unknown_key: 1\n", "p_min: 2\n", "workers: 0\n", "parity: both\n"],
)
def test_run_config_rejects_bad_files(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.load(path)


def test_seed_fills_the_cache_and_drops_bad_entries(tmp_path):
    assert seed(tmp_path) == sorted(bundled_records())
    assert seed(tmp_path) == []

    db = CurveDB(cache_dir=tmp_path)
    db.store(CurveRecord("46a1", bundled_records()["14a1"].a_invariants, 46))
    assert wipe_cache(db) == ["46a1"]
    assert "46a1" not in db.cached_labels()
    assert seed(tmp_path) == ["46a1"]
    assert db.read_cached("46a1") == bundled_records()["46a1"]
