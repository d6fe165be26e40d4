import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from app.errors import ConfigError


def _default_cache_dir():
    return os.environ.get(
        "NAGELL_CACHE_DIR", str(Path.home() / ".cache" / "nagell-sieve")
    )


def _env_flag(name):
    return os.environ.get(name, "").lower() in ("1", "true", "yes")


class Config:
    """
    General Configuration for the application.
    """

    #### General Configuration
    ENABLE_CORS = True
    SWAGGER_UI_DOC_EXPANSION = "list"
    RESTX_MASK_SWAGGER = False
    LOG_LEVEL = "INFO"

    #### Curve data
    CURVE_CACHE_DIR = _default_cache_dir()
    OFFLINE = _env_flag("NAGELL_OFFLINE")
    LMFDB_URL_TEMPLATE = (
        "https://www.lmfdb.org/api/ec_curvedata/"
        "?Clabel={label}&_format=json&_fields=Clabel,ainvs,conductor"
    )
    LMFDB_TIMEOUT = 10.0
    LMFDB_RETRIES = 3

    #### Sieve defaults
    SIEVE_M_MAX = 200
    SIEVE_ELL_COUNT = 12
    HIGHP_M_MAX = 1000
    SIEVE_SEED = 20240229
    HENSEL_K_CAP = 50
    ENUMERATION_LIMIT = 200

    #### Web API limits
    MAX_SEARCH_X = 10**4
    MAX_SEARCH_ALPHA = 40


class TestConfig(Config):
    TESTING = True
    OFFLINE = True
    ENABLE_CORS = False
    LOG_LEVEL = "WARNING"


@dataclass(frozen=True)
class RunConfig:
    """Settings of one CLI run; flags override the YAML file, which overrides these defaults."""

    pairs: tuple = ()
    parity: str | None = None
    p_min: int = 11
    p_max: int = 199
    m_max: int = Config.SIEVE_M_MAX
    ell_count: int = Config.SIEVE_ELL_COUNT
    highp_m_max: int = Config.HIGHP_M_MAX
    seed: int = Config.SIEVE_SEED
    offline: bool = True
    cache_dir: str = field(default_factory=_default_cache_dir)
    output_dir: str = "reports"
    workers: int = 1
    k_cap: int = Config.HENSEL_K_CAP
    enumeration_limit: int = Config.ENUMERATION_LIMIT
    timings: bool = False

    @classmethod
    def load(cls, path=None, **overrides):
        path = path or os.environ.get("NAGELL_CONFIG")
        values = {}
        if path:
            try:
                with open(path, encoding="utf-8") as fh:
                    values = yaml.safe_load(fh) or {}
            except OSError as e:
                raise ConfigError(f"cannot read config file {path}: {e}") from e
            except yaml.YAMLError as e:
                raise ConfigError(f"config file {path} is not valid YAML: {e}") from e
            if not isinstance(values, dict):
                raise ConfigError(f"config file {path} must hold a mapping")
        if _env_flag("NAGELL_OFFLINE"):
            values.setdefault("offline", True)
        values.update({k: v for k, v in overrides.items() if v is not None})

        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(
                f"unknown configuration keys: {', '.join(unknown)} "
                f"(expected some of: {', '.join(sorted(known))})"
            )
        if "pairs" in values:
            values["pairs"] = tuple(tuple(int(v) for v in pair) for pair in values["pairs"])
        config = cls(**values)
        config.validate()
        return config

    def validate(self):
        if self.parity not in (None, "odd", "even"):
            raise ConfigError(f"parity must be 'odd' or 'even', got {self.parity!r}")
        if self.p_min < 3 or self.p_max < self.p_min:
            raise ConfigError(
                f"invalid p range {self.p_min}..{self.p_max}: need 3 <= p_min <= p_max"
            )
        for name in ("m_max", "ell_count", "highp_m_max", "workers", "k_cap"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        for pair in self.pairs:
            if len(pair) != 2:
                raise ConfigError(f"pairs must be [C1, q] entries, got {list(pair)}")

    def with_overrides(self, **overrides):
        config = replace(self, **{k: v for k, v in overrides.items() if v is not None})
        config.validate()
        return config

    def as_dict(self):
        data = asdict(self)
        data["pairs"] = [list(pair) for pair in self.pairs]
        return data
