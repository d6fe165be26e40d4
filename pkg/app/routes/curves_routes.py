from fractions import Fraction

from flask import Response, current_app, json, request
from flask_restx import Namespace, Resource, fields

from app.errors import InvalidInputError
from app.guards import domain_guard
from app.models.curvedb import CurveDB
from app.models.ellcurve import CurveQ, tate_conductor
from app.models.frey import trace
from app.models.instance import Instance

curves_nc = Namespace("curves", description="Elliptic curves over Q and the curve cache")

curve_input_model = curves_nc.model(
    "CurveInput",
    {
        "a_invariants": fields.List(fields.String, required=True, description="a1, a2, a3, a4, a6"),
    },
)

trace_input_model = curves_nc.inherit(
    "TraceInput",
    curve_input_model,
    {"ell": fields.Integer(required=True, description="A prime of good reduction")},
)

record_model = curves_nc.model(
    "CurveRecord",
    {
        "label": fields.String,
        "a_invariants": fields.List(fields.String),
        "conductor": fields.String,
    },
)


def _ok(payload):
    return Response(json.dumps(payload), status=200, mimetype="application/json")


def _curve_from(data):
    values = (data or {}).get("a_invariants")
    if not isinstance(values, list):
        raise InvalidInputError("a_invariants must be a list of five numbers")
    return CurveQ.from_ainvs([Fraction(str(a)) for a in values])


def _db():
    return CurveDB.from_config(current_app.config)


@curves_nc.route("/candidates")
class Candidates(Resource):
    @curves_nc.param("instance", "C1,q,parity", _in="query", required=True)
    @domain_guard
    def get(self):
        """Cremona labels of the newforms level lowering leaves for a pair"""
        instance = Instance.parse(request.args.get("instance", ""))
        return _ok(_db().candidates_for(instance).as_dict())


@curves_nc.route("/conductor")
class Conductor(Resource):
    @curves_nc.expect(curve_input_model)
    @domain_guard
    def post(self):
        """Minimal model, conductor and Kodaira symbols by Tate's algorithm"""
        return _ok(tate_conductor(_curve_from(request.get_json())).as_dict())


@curves_nc.route("/trace")
class Trace(Resource):
    @curves_nc.expect(trace_input_model)
    @domain_guard
    def post(self):
        """a_ell of the curve"""
        data = request.get_json() or {}
        ell = int(data["ell"])
        return _ok({"ell": ell, "a_ell": trace(_curve_from(data), ell)})


@curves_nc.route("/<string:label>")
@curves_nc.param("label", "Cremona label, e.g. 14a1")
class CurveDetail(Resource):
    @curves_nc.response(200, "Curve record", record_model)
    @domain_guard
    def get(self, label):
        """A bundled or cached curve; fetched from LMFDB only when the app is online"""
        record = _db().lookup(label)
        payload = record.as_dict()
        payload["conductor_checked"] = record.check_conductor()
        return _ok(payload)
