from flask import Response, current_app, json, request
from flask_restx import Namespace, Resource, fields

from app.errors import InvalidInputError
from app.guards import domain_guard
from app.models.instance import Instance
from app.models.tm import (
    descend,
    export_problem,
    hensel_root_free,
    resolve_bounded,
    yeven_system,
    yodd_exponent_cases,
    yodd_system,
)

tm_nc = Namespace("tm", description="Thue-Mahler equations for y odd and y even")

system_input_model = tm_nc.model(
    "SystemInput",
    {
        "instance": fields.String(required=True, description="C1,q,parity"),
        "p": fields.Integer(required=True),
    },
)

yodd_input_model = tm_nc.inherit(
    "YOddInput",
    system_input_model,
    {
        "k_cap": fields.Integer(description="Largest k tried without a Hensel bound"),
        "resolve": fields.Boolean(default=False),
    },
)

yeven_input_model = tm_nc.inherit(
    "YEvenInput",
    system_input_model,
    {"descend": fields.Boolean(default=False)},
)

hensel_input_model = tm_nc.model(
    "HenselInput",
    {
        "coefficients": fields.List(fields.String, required=True, description="Highest degree first"),
        "q": fields.Integer(required=True),
        "k_cap": fields.Integer,
    },
)


def _ok(payload):
    return Response(json.dumps(payload), status=200, mimetype="application/json")


def _instance_and_p(data):
    return Instance.parse(data["instance"]), int(data["p"])


@tm_nc.route("/yodd")
class YOdd(Resource):
    @tm_nc.expect(yodd_input_model)
    @domain_guard
    def post(self):
        """Open alternatives for odd y and the candidates for s"""
        data = request.get_json() or {}
        instance, p = _instance_and_p(data)
        k_cap = int(data.get("k_cap") or current_app.config["HENSEL_K_CAP"])
        system = yodd_system(instance, p, k_cap)
        payload = {
            "cases": yodd_exponent_cases(instance.C1, instance.q, instance.parity, p),
            "system": system.as_dict(),
        }
        if data.get("resolve"):
            payload["resolved"] = [resolve_bounded(system, entry, k_cap).as_dict() for entry in system.entries]
        return _ok(payload)


@tm_nc.route("/yeven")
class YEven(Resource):
    @tm_nc.expect(yeven_input_model)
    @domain_guard
    def post(self):
        """The y-even Thue-Mahler equation as an exportable problem"""
        data = request.get_json() or {}
        problem = yeven_system(*_instance_and_p(data))
        payload = {"problem": export_problem(problem)}
        if data.get("descend"):
            payload["descents"] = [export_problem(d) for d in descend(problem)]
        return _ok(payload)


@tm_nc.route("/hensel")
class Hensel(Resource):
    @tm_nc.expect(hensel_input_model)
    @domain_guard
    def post(self):
        """Whether a univariate integer polynomial has a q-adic root"""
        data = request.get_json() or {}
        coefficients = [int(c) for c in data["coefficients"]]
        if not coefficients:
            raise InvalidInputError("coefficients must not be empty")
        k_cap = int(data.get("k_cap") or current_app.config["HENSEL_K_CAP"])
        return _ok(hensel_root_free(coefficients, int(data["q"]), k_cap).as_dict())
