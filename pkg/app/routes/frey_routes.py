from flask import Response, current_app, json, request
from flask_restx import Namespace, Resource, fields

from app.guards import domain_guard
from app.models.curvedb import CurveDB, candidate_labels
from app.models.ellcurve import tate_conductor
from app.models.frey import bound_p, frey_curve, level, two_power_targets
from app.models.instance import Instance

frey_nc = Namespace("frey", description="Frey curves, levels and bounds on the exponent")

solution_model = frey_nc.model(
    "FreySolution",
    {
        "C1": fields.Integer(required=True),
        "q": fields.Integer(required=True),
        "x": fields.String(required=True),
        "y": fields.String(required=True),
        "alpha": fields.Integer(required=True),
        "p": fields.Integer(required=True),
    },
)

bound_input_model = frey_nc.model(
    "BoundPInput",
    {
        "instance": fields.String(required=True, description="C1,q,parity"),
        "labels": fields.List(fields.String, description="Candidate labels (default: all for the pair)"),
        "two_power": fields.Boolean(default=False),
        "ell_max": fields.Integer(default=100),
        "p_divides_alpha": fields.Boolean(default=False),
    },
)


def _ok(payload):
    return Response(json.dumps(payload), status=200, mimetype="application/json")


@frey_nc.route("/curve")
class Curve(Resource):
    @frey_nc.expect(solution_model)
    @domain_guard
    def post(self):
        """The Frey curve of a solution with y even, checked by Tate's algorithm"""
        data = request.get_json() or {}
        curve = frey_curve(
            int(data["C1"]), int(data["q"]), int(data["x"]), int(data["y"]), int(data["alpha"]), int(data["p"])
        )
        payload = curve.as_dict()
        payload["tate"] = tate_conductor(curve.curve).as_dict()
        return _ok(payload)


@frey_nc.route("/level")
class Level(Resource):
    @frey_nc.param("C1", "Squarefree C1", _in="query", required=True)
    @frey_nc.param("q", "Prime q", _in="query", required=True)
    @frey_nc.param("p_divides_alpha", "true when p | alpha", _in="query")
    @domain_guard
    def get(self):
        """Level of the newform after level lowering"""
        C1, q = int(request.args["C1"]), int(request.args["q"])
        flag = request.args.get("p_divides_alpha", "false").lower() in ("1", "true", "yes")
        return _ok(level(C1, q, flag).as_dict())


@frey_nc.route("/bound-p")
class BoundP(Resource):
    @frey_nc.expect(bound_input_model)
    @domain_guard
    def post(self):
        """Direct bound, inertia, twist and discriminant checks per candidate curve"""
        data = request.get_json() or {}
        instance = Instance.parse(data["instance"])
        db = CurveDB.from_config(current_app.config)
        labels = data.get("labels") or candidate_labels(instance)
        curves = {label: db.lookup(label).curve for label in labels}
        if data.get("two_power"):
            curves.update({f"2^{t.t}": t.curve for t in two_power_targets(instance)})
        summary = bound_p(instance, curves, int(data.get("ell_max", 100)), bool(data.get("p_divides_alpha")))
        return _ok(summary.as_dict())
