"""
Command line entry point: ``python -m app <command>`` or ``flask nagell <command>``.

Data goes to stdout (JSON unless a command says otherwise), progress to stderr
through logging, and every run except ``report`` persists a report envelope
under the output directory.
"""
import json
import logging
import time
from fractions import Fraction
from functools import wraps
from pathlib import Path

import click
from sympy import nextprime, primerange

from app import __version__, configure_logging
from app.config import RunConfig
from app.errors import ConfigError, InvalidInputError, NagellError
from app.models.curvedb import CurveDB, bad_pairs, bundled_records, candidate_labels, good_pairs
from app.models.ellcurve import CurveQ, tate_conductor
from app.models.frey import bound_p, frey_curve, trace, two_power_targets
from app.models.instance import Instance
from app.models.lfl import REGIME_P, audit, bound_params, j_bound, n0_lookup, y_lower_bound, ypbig_check
from app.models.quadfield import QuadField, class_group, element_factorisation_data, split_prime
from app.models.search import (
    DEFAULT_N_SET,
    Solution,
    admissible_pairs,
    coprime_pairs,
    diff,
    run_search,
    table_rows,
    to_csv,
    to_json,
)
from app.models.sieves import sieve_range
from app.models.tm import (
    TMProblem,
    descend,
    export_problem,
    import_results,
    resolve_bounded,
    yeven_system,
    yodd_exponent_cases,
    yodd_system,
)
from app.reports import envelope, list_reports, load_report, write_report

logger = logging.getLogger(__name__)

EXIT_INCONCLUSIVE = 2
EXIT_CANCELLED = 130

# settings that never change a result and stay out of the report
_LOCAL_SETTINGS = ("cache_dir", "output_dir", "workers", "timings")


class NagellGroup(click.Group):
    """Usage errors exit with 1; 2 means an inconclusive verdict."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise


def domain_errors(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NagellError as e:
            raise click.ClickException(str(e)) from e

    return wrapper


class InstanceType(click.ParamType):
    name = "C1,q,parity"

    def convert(self, value, param, ctx):
        if isinstance(value, Instance):
            return value
        try:
            return Instance.parse(value.strip().strip("()"))
        except NagellError as e:
            self.fail(str(e), param, ctx)


class BigInt(click.ParamType):
    """Integers written plainly, as 1e6 or as 10^6."""

    name = "integer"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            return value
        try:
            return _big_int(value)
        except ValueError:
            self.fail(f"{value!r} is not an integer", param, ctx)


def _big_int(text):
    text = text.strip().replace("_", "")
    if "+" in text and "e" not in text.lower():
        return sum(_big_int(part) for part in text.split("+"))
    if "^" in text:
        base, exponent = text.split("^")
        return int(base) ** int(exponent)
    value = Fraction(text) if "e" not in text.lower() else Fraction(float(text))
    if value.denominator != 1:
        raise ValueError(text)
    return int(value)


INSTANCE = InstanceType()
BIG_INT = BigInt()


def _settings(run):
    data = run.as_dict()
    for name in _LOCAL_SETTINGS:
        data.pop(name)
    return data


def _emit(data):
    click.echo(json.dumps(data, indent=2, sort_keys=True))


def _persist(run, command, args, results, started, cancelled=False):
    timings = {"seconds": round(time.perf_counter() - started, 3)} if run.timings else None
    document = envelope(command, {"args": args, "run": _settings(run)}, results, run.seed, cancelled, timings)
    return write_report(document, run.output_dir)


def _finish(ctx, inconclusive=False, cancelled=False):
    if cancelled:
        ctx.exit(EXIT_CANCELLED)
    if inconclusive:
        ctx.exit(EXIT_INCONCLUSIVE)


@click.group(cls=NagellGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML run configuration.")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
@click.option("-q", "--quiet", is_flag=True, help="Warnings only.")
@click.option("--offline/--online", default=None, help="Never fetch curves over HTTP.")
@click.option("--cache-dir", type=click.Path(file_okay=False), help="Curve cache directory.")
@click.option("--output-dir", type=click.Path(file_okay=False), help="Where reports are written.")
@click.option("--workers", type=int, help="Worker processes for ranges and searches.")
@click.option("--seed", type=int, help="Seed of every randomised step.")
@click.option("--timings/--no-timings", default=None, help="Record wall-clock times in reports.")
@click.version_option(__version__, prog_name="nagell-sieve")
@click.pass_context
def cli(ctx, config_path, verbose, quiet, offline, cache_dir, output_dir, workers, seed, timings):
    """Exponent elimination for C1*x^2 + q^alpha = y^n."""
    configure_logging("DEBUG" if verbose else "WARNING" if quiet else "INFO")
    try:
        ctx.obj = RunConfig.load(
            config_path,
            offline=offline,
            cache_dir=cache_dir,
            output_dir=output_dir,
            workers=workers,
            seed=seed,
            timings=timings,
        )
    except ConfigError as e:
        raise click.UsageError(str(e), ctx) from e


def _p_values(run, p, p_range, p_count):
    if p:
        return sorted(set(p))
    if p_range:
        low, _, high = p_range.partition("..")
        try:
            low, high = _big_int(low), _big_int(high or low)
        except ValueError as e:
            raise click.BadParameter(f"expected A..B, got {p_range!r}", param_hint="--p-range") from e
    else:
        low, high = run.p_min, run.p_max
    low = max(low, 11)
    if p_count:
        values, prime = [], nextprime(low - 1)
        while len(values) < p_count:
            values.append(int(prime))
            prime = nextprime(prime)
        return values
    if high < low:
        raise click.BadParameter(f"empty range {low}..{high}", param_hint="--p-range")
    return [int(r) for r in primerange(low, high + 1)]


def _target(run, instance, label, ainvs, two_power):
    chosen = sum(1 for option in (label, ainvs, two_power) if option)
    if chosen != 1:
        raise click.UsageError("give exactly one of --target, --ainvs or --two-power")
    if label:
        return CurveDB.from_config(run).lookup(label).curve, label
    if ainvs:
        try:
            values = [Fraction(a) for a in ainvs.split(",")]
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--ainvs") from e
        return CurveQ.from_ainvs(values), None
    targets = two_power_targets(instance)
    if not targets:
        raise InvalidInputError(f"no identity C1*x^2 + q^a = 2^t gives a target for {instance.label}")
    first = targets[0]
    return first.curve, f"2^{first.t}"


def sieve_options(fn):
    for decorator in reversed(
        (
            click.argument("instance", type=INSTANCE),
            click.option("--target", "label", help="Cremona label of the target curve."),
            click.option("--ainvs", help="Target a-invariants a1,a2,a3,a4,a6."),
            click.option("--two-power", is_flag=True, help="Use the Frey curve of C1*x^2 + q^a = 2^t."),
            click.option("--p", "p", type=BIG_INT, multiple=True, help="Exponent to sieve (repeatable)."),
            click.option("--p-range", help="Inclusive range A..B of exponents."),
            click.option("--p-count", type=int, help="Number of consecutive primes from the range start."),
            click.option("--m-max", type=int, help="Largest m with ell = 2mp + 1."),
            click.option("--ell-count", type=int, help="Number of auxiliary primes used."),
            click.option("--irrational", is_flag=True, help="The target has irrational Hecke eigenvalues."),
            click.option("--p-divides-alpha", is_flag=True),
            click.option("--no-shortcut", is_flag=True, help="Always compute traces in full."),
        )
    ):
        fn = decorator(fn)
    return fn


def _run_sieve(ctx, method, instance, label, ainvs, two_power, p, p_range, p_count, m_max, ell_count,
               irrational, p_divides_alpha, no_shortcut):
    started = time.perf_counter()
    run = ctx.obj
    budget = "highp_m_max" if method == "highp" else "m_max"
    run = run.with_overrides(**{budget: m_max}, ell_count=ell_count)
    target, target_label = _target(run, instance, label, ainvs, two_power)
    p_values = _p_values(run, p, p_range, p_count)
    result = sieve_range(
        instance,
        target,
        p_values,
        method,
        run,
        target_label,
        rational=not irrational,
        p_divides_alpha=p_divides_alpha,
        shortcut=not no_shortcut,
    )
    results = result.as_dict()
    args = {
        "instance": instance.as_dict(),
        "target": target_label,
        "ainvs": target.as_list(),
        "p_values": p_values,
        "rational": not irrational,
        "p_divides_alpha": p_divides_alpha,
        "shortcut": not no_shortcut,
    }
    _persist(run, f"sieve-{method}", args, results, started, result.cancelled)
    _emit(results)
    _finish(ctx, result.inconclusive, result.cancelled)


@cli.command("sieve-kraus")
@sieve_options
@click.pass_context
@domain_errors
def sieve_kraus(ctx, **options):
    """Kraus sieve over residue classes of alpha mod 2p."""
    _run_sieve(ctx, "kraus", **options)


@cli.command("sieve-tm")
@sieve_options
@click.pass_context
@domain_errors
def sieve_tm(ctx, **options):
    """Kraus sieve combined with the y-even Thue-Mahler equation."""
    _run_sieve(ctx, "combined", **options)


@cli.command("sieve-highp")
@sieve_options
@click.pass_context
@domain_errors
def sieve_highp(ctx, **options):
    """Large-exponent sieve through Legendre curves."""
    _run_sieve(ctx, "highp", **options)


def _parse_pairs(values):
    pairs = []
    for text in values:
        try:
            C1, q = (int(v) for v in text.strip("()").split(","))
        except ValueError as e:
            raise click.BadParameter(f"expected C1,q, got {text!r}", param_hint="--pair") from e
        pairs.append((C1, q))
    return pairs


@cli.command()
@click.option("--pair", "pair_text", multiple=True, help="C1,q (repeatable).")
@click.option("--all-pairs", is_flag=True, help="All 101 coprime pairs.")
@click.option("--xmax", type=BIG_INT, default=1000, show_default=True)
@click.option("--alpha-max", type=int, default=40, show_default=True)
@click.option("--n", "n_set", type=int, multiple=True, help=f"Exponents n (default {DEFAULT_N_SET}).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--check", is_flag=True, help="Diff against the bundled solution table.")
@click.option("--checkpoint/--no-checkpoint", default=True, help="Resume from the output directory.")
@click.pass_context
@domain_errors
def search(ctx, pair_text, all_pairs, xmax, alpha_max, n_set, fmt, check, checkpoint):
    """Enumerate solutions with x <= XMAX and alpha <= ALPHA-MAX."""
    started = time.perf_counter()
    run = ctx.obj
    if all_pairs:
        pairs = coprime_pairs()
    else:
        pairs = _parse_pairs(pair_text) or [tuple(pair) for pair in run.pairs]
    if not pairs:
        raise click.UsageError("give --pair C1,q or --all-pairs")
    n_set = tuple(sorted(set(n_set))) or DEFAULT_N_SET
    path = Path(run.output_dir) / "search-checkpoint.json" if checkpoint else None
    result = run_search(pairs, xmax, alpha_max, n_set, run.workers, path)

    results = result.as_dict()
    inconclusive = False
    if check:
        expected = [
            row
            for C1, q in pairs
            for row in table_rows(C1, q, x_max=xmax, alpha_max=alpha_max, n_set=n_set)
        ]
        delta = diff(result.solutions, expected)
        results["diff"] = delta.as_dict()
        inconclusive = not delta.empty
        if inconclusive:
            logger.warning(f"search differs from the table: {len(delta.missing)} missing, {len(delta.extra)} extra")
    args = {"pairs": [list(pair) for pair in pairs], "x_max": xmax, "alpha_max": alpha_max, "n_set": list(n_set)}
    _persist(run, "search", args, results, started, result.cancelled)
    if path is not None and not result.cancelled:
        path.unlink(missing_ok=True)
    if fmt == "csv":
        click.echo(to_csv(result.solutions), nl=False)
    else:
        click.echo(to_json(result.solutions))
    _finish(ctx, inconclusive, result.cancelled)


@cli.command()
@click.argument("values", nargs=6, type=BIG_INT)
@click.pass_context
@domain_errors
def verify(ctx, values):
    """Check one row C1 q x y alpha n."""
    started = time.perf_counter()
    solution = Solution(*values)
    ok = solution.verify()
    results = {"solution": solution.as_row(), "holds": ok}
    _persist(ctx.obj, "verify", {"solution": solution.as_row()}, results, started)
    _emit(results)
    _finish(ctx, not ok)


@cli.command()
@click.option("--parity", type=click.Choice(["odd", "even", "all"]), default="all", show_default=True)
@click.pass_context
@domain_errors
def pairs(ctx, parity):
    """Coprime pairs and those admitting even y."""
    started = time.perf_counter()
    parities = ("odd", "even") if parity == "all" else (parity,)
    results = {"coprime": len(coprime_pairs())}
    for name in parities:
        results[name] = {
            "admissible": [list(pair) for pair in admissible_pairs(parity=name)],
            "bad": [list(pair) for pair in bad_pairs(name)],
            "good": [list(pair) for pair in good_pairs(name)],
        }
    _persist(ctx.obj, "pairs", {"parity": parity}, results, started)
    _emit(results)


@cli.command()
@click.argument("c", type=int)
@click.option("--split", "split_primes", type=int, multiple=True, help="Show how r splits (repeatable).")
@click.option("--factorisation", nargs=2, type=int, metavar="C1 P", help="Factorisation data for C1 and p.")
@click.pass_context
@domain_errors
def classgroup(ctx, c, split_primes, factorisation):
    """Class group of Q(sqrt(-c)) and the class of the prime above 2."""
    started = time.perf_counter()
    field_ = QuadField(c)
    results = class_group(field_).as_dict()
    if split_primes:
        results["split"] = {str(r): split_prime(field_, r).as_dict() for r in split_primes}
    if factorisation:
        results["factorisation"] = element_factorisation_data(field_, *factorisation).as_dict()
    args = {"c": c, "split": list(split_primes), "factorisation": list(factorisation or ())}
    _persist(ctx.obj, "classgroup", args, results, started)
    _emit(results)


@cli.command()
@click.argument("label")
@click.option("--trace", "ells", type=int, multiple=True, help="Print a_ell (repeatable).")
@click.pass_context
@domain_errors
def curve(ctx, label, ells):
    """A curve by Cremona label, with its conductor recomputed by Tate."""
    started = time.perf_counter()
    record = CurveDB.from_config(ctx.obj).lookup(label)
    results = {
        "record": record.as_dict(),
        "tate": tate_conductor(record.curve).as_dict(),
        "traces": {str(ell): trace(record.curve, ell) for ell in ells},
    }
    _persist(ctx.obj, "curve", {"label": label, "ells": list(ells)}, results, started)
    _emit(results)


@cli.command()
@click.argument("values", nargs=6, type=BIG_INT, metavar="C1 Q X Y ALPHA P")
@click.pass_context
@domain_errors
def frey(ctx, values):
    """The Frey curve of a solution, its conductor and the level it lowers to."""
    started = time.perf_counter()
    C1, q, x, y, alpha, p = values
    curve_ = frey_curve(C1, q, x, y, alpha, p)
    results = curve_.as_dict()
    results["tate"] = tate_conductor(curve_.curve).as_dict()
    _persist(ctx.obj, "frey", {"solution": list(values)}, results, started)
    _emit(results)


@cli.command("bound-p")
@click.argument("instance", type=INSTANCE)
@click.option("--label", "labels", multiple=True, help="Restrict to these candidate labels.")
@click.option("--two-power", is_flag=True, help="Add the 2^t Frey curves as targets.")
@click.option("--ell-max", type=int, default=100, show_default=True)
@click.option("--p-divides-alpha", is_flag=True)
@click.pass_context
@domain_errors
def bound_p_command(ctx, instance, labels, two_power, ell_max, p_divides_alpha):
    """Direct bound, inertia, twist and discriminant checks for every candidate curve."""
    started = time.perf_counter()
    db = CurveDB.from_config(ctx.obj)
    labels = labels or candidate_labels(instance)
    if not labels and not two_power:
        logger.warning(f"{instance.label} has no candidate newforms; nothing to bound")
    curves = {label: db.lookup(label).curve for label in labels}
    if two_power:
        curves.update({f"2^{t.t}": t.curve for t in two_power_targets(instance)})
    summary = bound_p(instance, curves, ell_max, p_divides_alpha)
    results = summary.as_dict()
    args = {"instance": instance.as_dict(), "labels": sorted(curves), "ell_max": ell_max,
            "p_divides_alpha": p_divides_alpha}
    _persist(ctx.obj, "bound-p", args, results, started)
    _emit(results)


def _tm_problem(instance, p, case, k_cap):
    if case == "yeven":
        return yeven_system(instance, p)
    return yodd_system(instance, p, k_cap).as_problem()


@cli.command("tm-export")
@click.argument("instance", type=INSTANCE)
@click.argument("p", type=int)
@click.option("--case", type=click.Choice(["yeven", "yodd"]), default="yeven", show_default=True)
@click.option("--descend", "with_descent", is_flag=True, help="Also export the non-coprime descents.")
@click.pass_context
@domain_errors
def tm_export(ctx, instance, p, case, with_descent):
    """The Thue-Mahler equation for exponent p as a solver-neutral JSON document."""
    started = time.perf_counter()
    problem = _tm_problem(instance, p, case, ctx.obj.k_cap)
    results = {"problem": export_problem(problem)}
    if with_descent:
        results["descents"] = [export_problem(d) for d in descend(problem)]
    args = {"instance": instance.as_dict(), "p": p, "case": case, "descend": with_descent}
    _persist(ctx.obj, "tm-export", args, results, started)
    _emit(results)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except ValueError as e:
        raise click.BadParameter(f"{path} is not JSON: {e}") from e


@cli.command("tm-import")
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("results_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@domain_errors
def tm_import(ctx, problem_file, results_file):
    """Check an external solver's (U, V) pairs against an exported problem."""
    started = time.perf_counter()
    problem_doc = _read_json(problem_file)
    problem = TMProblem.from_dict(problem_doc.get("problem", problem_doc))
    solver_doc = _read_json(results_file)
    accepted = import_results(problem, solver_doc)
    results = {
        "submitted": len(solver_doc["solutions"]),
        "accepted": [a.as_dict() for a in accepted],
    }
    args = {"problem": problem.as_dict(), "solutions": solver_doc["solutions"]}
    _persist(ctx.obj, "tm-import", args, results, started)
    _emit(results)


@cli.command()
@click.argument("instance", type=INSTANCE)
@click.argument("p", type=int)
@click.option("--k-cap", type=int, help="Largest k tried when Hensel gives no bound.")
@click.option("--resolve", is_flag=True, help="Solve every candidate for s over the allowed k.")
@click.pass_context
@domain_errors
def yodd(ctx, instance, p, k_cap, resolve):
    """Odd-y analysis for exponent p: the open alternatives and the Thue-Mahler system."""
    started = time.perf_counter()
    run = ctx.obj.with_overrides(k_cap=k_cap)
    results = {"cases": yodd_exponent_cases(instance.C1, instance.q, instance.parity, p)}
    system = yodd_system(instance, p, run.k_cap)
    results["system"] = system.as_dict()
    inconclusive = False
    if resolve:
        resolved = [resolve_bounded(system, entry, run.k_cap) for entry in system.entries]
        results["resolved"] = [r.as_dict() for r in resolved]
        inconclusive = not all(r.exhaustive for r in resolved)
    args = {"instance": instance.as_dict(), "p": p, "resolve": resolve}
    _persist(run, "yodd", args, results, started)
    _emit(results)
    _finish(ctx, inconclusive)


@cli.command()
@click.argument("instance", type=INSTANCE)
@click.option("--p", "p", type=BIG_INT, default=REGIME_P + 1, show_default=True, help="Exponent for the y^p check.")
@click.option("--k", type=int, help="Also test y^p > 100*c*q^(2k) directly at this k.")
@click.option("--audit/--no-audit", "with_audit", default=True, show_default=True)
@click.pass_context
@domain_errors
def bounds(ctx, instance, p, k, with_audit):
    """Linear-forms-in-logarithms bounds: parameters, the y^p check, N0 and the audit."""
    started = time.perf_counter()
    results = {
        "params": bound_params(instance).as_dict(),
        "y_lower": str(y_lower_bound(p)),
        "j_bound": j_bound(p),
        "ypbig": ypbig_check(instance, p, k).as_dict(),
        "n0": str(n0_lookup(instance)),
    }
    inconclusive = False
    if with_audit:
        report = audit(instance)
        results["audit"] = report.as_dict()
        inconclusive = not report.consistent
    args = {"instance": instance.as_dict(), "p": p, "k": k, "audit": with_audit}
    _persist(ctx.obj, "bounds", args, results, started)
    _emit(results)
    _finish(ctx, inconclusive)


@cli.command()
@click.argument("name", required=False)
@click.option("--command", "command_name", help="Only reports of this command.")
@click.pass_context
@domain_errors
def report(ctx, name, command_name):
    """List stored reports, or print one after validating it."""
    directory = Path(ctx.obj.output_dir)
    if name:
        _emit(load_report(directory / name if not Path(name).exists() else name))
        return
    rows = []
    for path in list_reports(directory, command_name):
        if path.name == "search-checkpoint.json":
            continue
        try:
            document = load_report(path)
            rows.append({"name": path.name, "command": document["command"], "valid": True,
                         "cancelled": document["cancelled"]})
        except NagellError as e:
            logger.warning(str(e))
            rows.append({"name": path.name, "command": None, "valid": False, "cancelled": None})
    _emit(rows)


@cli.group(cls=NagellGroup)
def curves():
    """The local curve cache."""


@curves.command("sync")
@click.argument("labels", nargs=-1)
@click.option("--instance", type=INSTANCE, help="Sync every candidate label of this instance.")
@click.pass_context
@domain_errors
def curves_sync(ctx, labels, instance):
    """Fetch labels from LMFDB into the cache."""
    started = time.perf_counter()
    labels = list(labels) + (candidate_labels(instance) if instance else [])
    if not labels:
        raise click.UsageError("give labels or --instance")
    records = CurveDB.from_config(ctx.obj).sync(labels)
    results = {"records": [r.as_dict() for r in records]}
    _persist(ctx.obj, "curves-sync", {"labels": labels}, results, started)
    _emit(results)


@curves.command("list")
@click.option("--instance", type=INSTANCE, help="Show the candidate labels of this instance.")
@click.pass_context
@domain_errors
def curves_list(ctx, instance):
    """Bundled and cached labels."""
    started = time.perf_counter()
    db = CurveDB.from_config(ctx.obj)
    results = {"bundled": sorted(bundled_records()), "cached": db.cached_labels()}
    if instance is not None:
        available = set(results["bundled"]) | set(results["cached"])
        wanted = candidate_labels(instance)
        results["candidates"] = wanted
        results["missing"] = [label for label in wanted if label not in available]
    args = {"instance": None if instance is None else instance.as_dict()}
    _persist(ctx.obj, "curves-list", args, results, started)
    _emit(results)


def main():
    cli(prog_name="nagell")
