import pytest
from click.testing import CliRunner

from app import create_app
from app.config import TestConfig
from app.models.instance import Instance


@pytest.fixture()
def app(tmp_path):
    class Config(TestConfig):
        CURVE_CACHE_DIR = str(tmp_path / "cache")

    app = create_app(Config)
    yield app


@pytest.fixture()
def client(app):
    return app.test_client()


@pytest.fixture()
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture()
def cli_args(tmp_path):
    """Global options pointing every CLI run at throwaway directories."""
    return ["--offline", "--cache-dir", str(tmp_path / "cache"), "--output-dir", str(tmp_path / "reports")]


@pytest.fixture()
def reports_dir(tmp_path):
    return tmp_path / "reports"


@pytest.fixture()
def odd_1_7():
    return Instance(1, 7, "odd")


@pytest.fixture()
def odd_1_23():
    return Instance(1, 23, "odd")
