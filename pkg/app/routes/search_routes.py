from flask import Response, current_app, json, request
from flask_restx import Namespace, Resource, fields

from app.errors import InvalidInputError
from app.guards import domain_guard
from app.models.search import DEFAULT_N_SET, Solution, admissible_pairs, coprime_pairs, enumerate_solutions

search_nc = Namespace("search", description="Bounded search for solutions")

enumerate_input_model = search_nc.model(
    "EnumerateInput",
    {
        "C1": fields.Integer(required=True),
        "q": fields.Integer(required=True),
        "x_max": fields.Integer(required=True),
        "alpha_max": fields.Integer(required=True),
        "n_set": fields.List(fields.Integer, description=f"Default {list(DEFAULT_N_SET)}"),
    },
)

solution_model = search_nc.model(
    "Solution",
    {
        "C1": fields.Integer(required=True),
        "q": fields.Integer(required=True),
        "x": fields.String(required=True),
        "y": fields.String(required=True),
        "alpha": fields.Integer(required=True),
        "n": fields.Integer(required=True),
    },
)


def _ok(payload):
    return Response(json.dumps(payload), status=200, mimetype="application/json")


@search_nc.route("/enumerate")
class Enumerate(Resource):
    @search_nc.expect(enumerate_input_model)
    @domain_guard
    def post(self):
        """Every solution with x <= x_max, alpha <= alpha_max and n in n_set"""
        data = request.get_json() or {}
        x_max, alpha_max = int(data["x_max"]), int(data["alpha_max"])
        config = current_app.config
        if x_max > config["MAX_SEARCH_X"] or alpha_max > config["MAX_SEARCH_ALPHA"]:
            raise InvalidInputError(
                f"the web API searches up to x = {config['MAX_SEARCH_X']} and "
                f"alpha = {config['MAX_SEARCH_ALPHA']}; use the command line for more"
            )
        n_set = tuple(data.get("n_set") or DEFAULT_N_SET)
        found = enumerate_solutions(int(data["C1"]), int(data["q"]), x_max, alpha_max, n_set)
        return _ok({"solutions": [s.as_dict() for s in found]})


@search_nc.route("/pairs")
class Pairs(Resource):
    @search_nc.param("parity", "odd or even", _in="query")
    @domain_guard
    def get(self):
        """The coprime pairs and those where y can be even"""
        parity = request.args.get("parity", "odd")
        pairs = admissible_pairs(parity=parity)
        return _ok({"coprime": len(coprime_pairs()), "parity": parity, "admissible": [list(p) for p in pairs]})


@search_nc.route("/verify")
class Verify(Resource):
    @search_nc.expect(solution_model)
    @domain_guard
    def post(self):
        """Check C1*x^2 + q^alpha = y^n exactly"""
        data = request.get_json() or {}
        solution = Solution(*(int(data[name]) for name in ("C1", "q", "x", "y", "alpha", "n")))
        return _ok({"solution": solution.as_dict(), "holds": solution.verify()})
