from flask import Response, json
from flask_restx import Namespace, Resource, fields

from app.guards import domain_guard
from app.models.quadfield import (
    QuadField,
    class_group,
    element_factorisation_data,
    p2_distinguished_elements,
    split_prime,
)

fields_nc = Namespace("fields", description="Imaginary quadratic fields Q(sqrt(-c))")

element_model = fields_nc.model(
    "QuadElement",
    {
        "a": fields.String,
        "b": fields.String,
    },
)

class_group_model = fields_nc.model(
    "ClassGroup",
    {
        "c": fields.Integer,
        "disc": fields.Integer,
        "h_K": fields.Integer,
        "reduced_forms": fields.List(fields.List(fields.Integer)),
        "p2_order": fields.Integer,
        "p2_is_generator": fields.Boolean,
        "s": fields.Integer,
        "delta": fields.Nested(element_model, allow_null=True),
    },
)


def _ok(payload):
    return Response(json.dumps(payload), status=200, mimetype="application/json")


@fields_nc.route("/<int:c>/classgroup")
@fields_nc.param("c", "Positive squarefree c")
class ClassGroup(Resource):
    @fields_nc.response(200, "Class group", class_group_model)
    @domain_guard
    def get(self, c):
        """Class number, reduced forms and the class of the prime above 2"""
        return _ok(class_group(QuadField(c)).as_dict())


@fields_nc.route("/<int:c>/split/<int:r>")
@fields_nc.param("c", "Positive squarefree c")
@fields_nc.param("r", "A rational prime")
class Split(Resource):
    @domain_guard
    def get(self, c, r):
        """Decomposition of r in the ring of integers"""
        return _ok(split_prime(QuadField(c), r).as_dict())


@fields_nc.route("/<int:c>/distinguished")
@fields_nc.param("c", "Positive squarefree c with 2 split")
class Distinguished(Resource):
    @domain_guard
    def get(self, c):
        """s, delta and beta = delta / conj(delta) for the prime above 2"""
        s, delta, beta = p2_distinguished_elements(QuadField(c))
        return _ok({"c": c, "s": s, "delta": delta.as_dict(), "beta": beta.as_dict()})


@fields_nc.route("/<int:c>/factorisation/<int:C1>/<int:p>")
@fields_nc.param("c", "Positive squarefree c")
@fields_nc.param("C1", "Squarefree C1 dividing c")
@fields_nc.param("p", "Odd prime exponent")
class Factorisation(Resource):
    @domain_guard
    def get(self, c, C1, p):
        """The j, i, n* exponents and the generators omega, delta"""
        return _ok(element_factorisation_data(QuadField(c), C1, p).as_dict())
