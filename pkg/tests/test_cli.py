import json

import pytest

from app import __version__
from app.cli import EXIT_INCONCLUSIVE, _big_int, cli
from app.models.instance import Instance
from app.models.search import Solution
from app.models.tm import recover_uv, yeven_system


@pytest.fixture()
def invoke(runner, cli_args):
    def run(*args):
        return runner.invoke(cli, [*cli_args, *map(str, args)])

    return run


@pytest.mark.parametrize(
    "text, value",
    [("1000", 1000), ("1e6", 10**6), ("10^6", 10**6), ("10^6+10^4", 10**6 + 10**4), ("1_000", 1000), ("2e+3", 2000)],
)
def test_big_int(text, value):
    assert _big_int(text) == value


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_pairs_writes_a_report(invoke, reports_dir):
    result = invoke("pairs")
    assert result.exit_code == 0, result.stderr
    data = json.loads(result.output)
    assert data["coprime"] == 101
    assert len(data["odd"]["admissible"]) == 18
    assert len(data["even"]["bad"]) == 8
    reports = list(reports_dir.glob("pairs-*.json"))
    assert len(reports) == 1
    document = json.loads(reports[0].read_text(encoding="utf-8"))
    assert "cache_dir" not in document["config"]["run"]
    assert "output_dir" not in document["config"]["run"]


def test_rerun_reuses_the_report(invoke, reports_dir):
    invoke("pairs", "--parity", "odd")
    invoke("pairs", "--parity", "odd")
    assert len(list(reports_dir.glob("pairs-*.json"))) == 1


def test_report_listing(invoke):
    invoke("classgroup", "23")
    listing = json.loads(invoke("report").output)
    assert [row["command"] for row in listing] == ["classgroup"]
    assert listing[0]["valid"]
    shown = invoke("report", listing[0]["name"])
    assert json.loads(shown.output)["results"]["h_K"] == 3


def test_classgroup(invoke):
    result = invoke("classgroup", "23", "--split", "2", "--factorisation", "1", "13")
    data = json.loads(result.output)
    assert data["h_K"] == 3
    assert data["split"]["2"]["kind"] == "split"
    assert data["factorisation"]["j"] == 0


def test_verify_exit_codes(invoke):
    assert invoke("verify", 1, 7, 5, 2, 1, 5).exit_code == 0
    failed = invoke("verify", 1, 7, 5, 2, 1, 6)
    assert failed.exit_code == EXIT_INCONCLUSIVE
    assert json.loads(failed.output)["holds"] is False


def test_invalid_instance_is_a_usage_error(invoke):
    result = invoke("sieve-kraus", "1,8,odd", "--target", "46a1", "--p", "11")
    assert result.exit_code == 1


def test_missing_target_is_a_usage_error(invoke):
    assert invoke("sieve-kraus", "1,23,odd", "--p", "11").exit_code == 1


def test_unknown_curve_offline(invoke):
    result = invoke("curve", "11a1")
    assert result.exit_code == 1
    assert "curves sync" in result.stderr


def test_bad_config_file(runner, cli_args, tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("surprise: 1\n", encoding="utf-8")
    result = runner.invoke(cli, [*cli_args, "--config", str(path), "pairs"])
    assert result.exit_code == 1


def test_sieve_kraus(invoke):
    result = invoke("sieve-kraus", "(1,23,odd)", "--target", "46a1", "--p", "11", "--m-max", "30", "--ell-count", "4")
    assert result.exit_code == 0, result.stderr
    data = json.loads(result.output)
    assert data["p_values"] == [11]
    assert data["not_eliminated"] == [11]
    assert 1 in data["reports"][0]["survivors"]


def test_sieve_highp_without_elimination_is_inconclusive(invoke):
    result = invoke("sieve-highp", "1,23,odd", "--target", "46a1", "--p", "11", "--m-max", "10")
    assert result.exit_code == EXIT_INCONCLUSIVE
    assert json.loads(result.output)["counts"]["inconclusive"] == 1


def test_search_with_check(invoke, reports_dir):
    result = invoke("search", "--pair", "1,7", "--xmax", "1e3", "--alpha-max", "6", "--check")
    assert result.exit_code == 0, result.stderr
    rows = json.loads(result.output)["rows"]
    assert [1, 7, 5, 2, 1, 5] in rows
    assert not (reports_dir / "search-checkpoint.json").exists()


def test_search_csv(invoke):
    result = invoke("search", "--pair", "1,23", "--xmax", "100", "--alpha-max", "2", "--n", "11", "--format", "csv")
    assert result.output == "C1,q,x,y,alpha,n\n1,23,45,2,1,11\n"


def test_search_needs_pairs(invoke):
    assert invoke("search").exit_code == 1


def test_curve_and_frey(invoke):
    data = json.loads(invoke("curve", "14a1", "--trace", "3").output)
    assert data["traces"] == {"3": -2}
    assert data["tate"]["conductor"] == 14
    frey = json.loads(invoke("frey", 1, 23, 45, 2, 1, 11).output)
    assert frey["level"] == 46
    assert frey["tate"]["conductor"] == 46


def test_bound_p(invoke):
    result = invoke("bound-p", "1,23,odd", "--ell-max", "60")
    assert result.exit_code == 0, result.stderr
    data = json.loads(result.output)
    assert data["level"] == 46
    assert data["counts"]["curves"] == 1


def test_bounds(invoke):
    result = invoke("bounds", "1,7,odd", "--k", "0")
    assert result.exit_code == 0, result.stderr
    data = json.loads(result.output)
    assert data["n0"] == "72341570"
    assert data["ypbig"]["direct"] is True
    assert data["audit"]["consistent"] is True


def test_bounds_for_good_pair(invoke):
    assert invoke("bounds", "5,19,odd").exit_code == 1


def test_yodd(invoke):
    plain = invoke("yodd", "1,7,odd", "5")
    assert plain.exit_code == 0
    assert "a" in json.loads(plain.output)["cases"]
    # candidates whose s involves q^k are only tried up to the cap
    resolved = invoke("yodd", "1,7,odd", "5", "--resolve", "--k-cap", "6")
    assert resolved.exit_code == EXIT_INCONCLUSIVE


def test_tm_export_then_import(invoke, tmp_path):
    exported = invoke("tm-export", "1,7,odd", "5", "--descend")
    assert exported.exit_code == 0, exported.stderr
    problem_file = tmp_path / "problem.json"
    problem_file.write_text(exported.output, encoding="utf-8")

    u, v = recover_uv(yeven_system(Instance(1, 7, "odd"), 5), Solution(1, 7, 5, 2, 1, 5))
    results_file = tmp_path / "solutions.json"
    results_file.write_text(json.dumps({"solutions": [{"U": str(u), "V": str(v)}]}), encoding="utf-8")

    imported = invoke("tm-import", problem_file, results_file)
    assert imported.exit_code == 0, imported.stderr
    data = json.loads(imported.output)
    assert data["submitted"] == 1
    assert data["accepted"][0]["solution"] == [1, 7, 5, 2, 1, 5]


def test_curves_list_and_sync(invoke):
    data = json.loads(invoke("curves", "list", "--instance", "13,11,odd").output)
    assert {"14a1", "46a1", "3718c1", "3718r1"} <= set(data["bundled"])
    assert data["candidates"] == ["3718c1", "3718r1"]
    assert data["missing"] == []
    assert invoke("curves", "sync", "11a1").exit_code == 1
    assert invoke("curves", "sync").exit_code == 1
    synced = invoke("curves", "sync", "14a1")
    assert synced.exit_code == 0
