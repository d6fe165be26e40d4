from flask import Response, json, request
from flask_restx import Namespace, Resource

from app.guards import domain_guard
from app.models.instance import Instance
from app.models.lfl import REGIME_P, audit, bound_params, n0_lookup, y_lower_bound, ypbig_check

bounds_nc = Namespace("bounds", description="Bounds from linear forms in logarithms")


def _ok(payload):
    return Response(json.dumps(payload), status=200, mimetype="application/json")


@bounds_nc.route("/<int:C1>/<int:q>/<string:parity>")
@bounds_nc.param("C1", "Squarefree C1")
@bounds_nc.param("q", "Prime q")
@bounds_nc.param("parity", "odd or even")
class Bounds(Resource):
    @bounds_nc.param("p", "Exponent for the y^p check", _in="query")
    @domain_guard
    def get(self, C1, q, parity):
        """Bound parameters, the y^p check, N0 and the Delta_2 audit for a bad pair"""
        instance = Instance(C1, q, parity)
        p = int(request.args.get("p", REGIME_P + 1))
        report = audit(instance)
        payload = {
            "params": bound_params(instance).as_dict(),
            "ypbig": ypbig_check(instance, p).as_dict(),
            "n0": str(n0_lookup(instance)),
            "audit": report.as_dict(),
        }
        return _ok(payload)


@bounds_nc.route("/y-lower/<int:p>")
@bounds_nc.param("p", "Prime exponent, at least 11")
class YLower(Resource):
    @domain_guard
    def get(self, p):
        """4p - 4 sqrt(2p) + 2, the least y allowed for a solution with y even"""
        return _ok({"p": p, "y_lower": str(y_lower_bound(p))})
