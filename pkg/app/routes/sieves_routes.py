from fractions import Fraction

from flask import Response, current_app, json, request
from flask_restx import Namespace, Resource, fields

from app.errors import InvalidInputError
from app.guards import domain_guard
from app.models.curvedb import CurveDB
from app.models.ellcurve import CurveQ
from app.models.frey import two_power_targets
from app.models.instance import Instance
from app.models.sieves import SieveConfig, combined_tm_sieve, highp_sieve, kraus_sieve
from app.models.tm import yeven_system

sieves_nc = Namespace("sieves", description="Exponent sieves for one prime p")

sieve_input_model = sieves_nc.model(
    "SieveInput",
    {
        "instance": fields.String(required=True, description="C1,q,parity"),
        "p": fields.Integer(required=True, description="Prime exponent, at least 11"),
        "target": fields.String(description="Cremona label of the target curve"),
        "a_invariants": fields.List(fields.String, description="Explicit target a-invariants"),
        "two_power": fields.Boolean(default=False, description="Target the Frey curve of C1*x^2 + q^a = 2^t"),
        "m_max": fields.Integer,
        "ell_count": fields.Integer,
        "seed": fields.Integer,
        "rational": fields.Boolean(default=True),
        "p_divides_alpha": fields.Boolean(default=False),
    },
)

entry_model = sieves_nc.model(
    "EllEntry",
    {
        "ell": fields.Integer,
        "m": fields.Integer,
        "condition": fields.String,
        "x_size": fields.Integer,
        "z": fields.List(fields.Integer),
    },
)

sieve_report_model = sieves_nc.model(
    "SieveReport",
    {
        "method": fields.String,
        "p": fields.Integer,
        "target": fields.String,
        "verdict": fields.String,
        "survivors": fields.List(fields.Integer),
        "ells": fields.List(fields.Nested(entry_model)),
        "seed": fields.Integer,
    },
)


def _target(instance, data):
    if data.get("target"):
        return CurveDB.from_config(current_app.config).lookup(data["target"]).curve, data["target"]
    if data.get("a_invariants"):
        return CurveQ.from_ainvs([Fraction(str(a)) for a in data["a_invariants"]]), None
    if data.get("two_power"):
        targets = two_power_targets(instance)
        if targets:
            return targets[0].curve, f"2^{targets[0].t}"
        raise InvalidInputError(f"no identity C1*x^2 + q^a = 2^t gives a target for {instance.label}")
    raise InvalidInputError("give one of target, a_invariants or two_power")


def _config(data, m_max_default):
    config = current_app.config
    instance = Instance.parse(data["instance"])
    target, label = _target(instance, data)
    return SieveConfig(
        instance,
        int(data["p"]),
        target,
        label,
        m_max=int(data.get("m_max") or m_max_default),
        ell_count=int(data.get("ell_count") or config["SIEVE_ELL_COUNT"]),
        seed=int(data.get("seed") or config["SIEVE_SEED"]),
        rational=bool(data.get("rational", True)),
        p_divides_alpha=bool(data.get("p_divides_alpha", False)),
        enumeration_limit=config["ENUMERATION_LIMIT"],
    )


def _ok(report):
    return Response(json.dumps(report.as_dict()), status=200, mimetype="application/json")


@sieves_nc.route("/kraus")
class Kraus(Resource):
    @sieves_nc.expect(sieve_input_model)
    @sieves_nc.response(200, "Sieve report", sieve_report_model)
    @domain_guard
    def post(self):
        """Residue classes of alpha mod 2p left by the Kraus sieve"""
        cfg = _config(request.get_json() or {}, current_app.config["SIEVE_M_MAX"])
        return _ok(kraus_sieve(cfg))


@sieves_nc.route("/combined")
class Combined(Resource):
    @sieves_nc.expect(sieve_input_model)
    @sieves_nc.response(200, "Sieve report", sieve_report_model)
    @domain_guard
    def post(self):
        """Kraus sieve refined by the y-even Thue-Mahler equation"""
        cfg = _config(request.get_json() or {}, current_app.config["SIEVE_M_MAX"])
        return _ok(combined_tm_sieve(cfg, yeven_system(cfg.instance, cfg.p)))


@sieves_nc.route("/highp")
class HighP(Resource):
    @sieves_nc.expect(sieve_input_model)
    @sieves_nc.response(200, "Sieve report", sieve_report_model)
    @domain_guard
    def post(self):
        """Large-exponent sieve through Legendre curves"""
        cfg = _config(request.get_json() or {}, current_app.config["HIGHP_M_MAX"])
        return _ok(highp_sieve(cfg))
