"""
JSON documents exchanged with the outside world, as Draft 2020-12 schemas.

Large integers travel as decimal strings so that no consumer has to care about
float precision.
"""
from jsonschema import Draft202012Validator
from jsonschema.exceptions import ValidationError

from app.errors import InvalidInputError

INTEGER_STRING = {"type": "string", "pattern": r"^-?[0-9]+$"}

CURVE_RECORD = {
    "type": "object",
    "required": ["label", "a_invariants", "conductor"],
    "properties": {
        "label": {"type": "string", "pattern": r"^[0-9]+[a-z]+[0-9]+$"},
        "a_invariants": {"type": "array", "items": INTEGER_STRING, "minItems": 5, "maxItems": 5},
        "conductor": INTEGER_STRING,
    },
    "additionalProperties": False,
}

CURVE_DATA = {"type": "array", "items": CURVE_RECORD}

LMFDB_RESPONSE = {
    "type": "object",
    "required": ["data"],
    "properties": {
        "data": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["Clabel", "ainvs", "conductor"],
                "properties": {
                    "Clabel": {"type": "string"},
                    "ainvs": {"type": "array", "items": {"type": "integer"}, "minItems": 5, "maxItems": 5},
                    "conductor": {"type": "integer", "minimum": 1},
                },
            },
        }
    },
}

POLYNOMIAL = {
    "type": "object",
    "required": ["degree", "coefficients"],
    "properties": {
        "degree": {"type": "integer", "minimum": 0},
        "coefficients": {"type": "array", "items": INTEGER_STRING},
    },
}

TM_PROBLEM = {
    "type": "object",
    "required": ["kind", "F", "a", "primes", "G", "b"],
    "properties": {
        "kind": {"enum": ["thue", "thue_mahler"]},
        "instance": {"type": "object"},
        "p": {"type": "integer"},
        "F": POLYNOMIAL,
        "a": INTEGER_STRING,
        "primes": {"type": "array", "items": {"type": "integer", "minimum": 2}},
        "G": POLYNOMIAL,
        "b": INTEGER_STRING,
        "content": INTEGER_STRING,
        "divisor": INTEGER_STRING,
        "gamma": {"type": "object"},
    },
}

TM_RESULTS = {
    "type": "object",
    "required": ["solutions"],
    "properties": {
        "solutions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["U", "V"],
                "properties": {"U": INTEGER_STRING, "V": INTEGER_STRING, "k": {"type": "integer", "minimum": 0}},
            },
        }
    },
}

SIEVE_REPORT = {
    "type": "object",
    "required": ["method", "instance", "p", "verdict", "survivors", "ells", "seed"],
    "properties": {
        "method": {"enum": ["kraus", "combined", "highp"]},
        "instance": {"type": "object"},
        "target": {"type": ["string", "null"]},
        "p": {"type": "integer", "minimum": 3},
        "verdict": {"enum": ["eliminated", "survivors", "inconclusive"]},
        "survivors": {"type": "array", "items": {"type": "integer"}},
        "classes": {"type": "array", "items": {"type": "integer"}},
        "ells": {"type": "array", "items": {"type": "object", "required": ["ell", "m"]}},
        "seed": {"type": "integer"},
        "seconds": {"type": "number"},
    },
}

RUN_REPORT = {
    "type": "object",
    "required": ["tool", "version", "command", "config", "seed", "results", "cancelled"],
    "properties": {
        "tool": {"const": "nagell-sieve"},
        "version": {"type": "string"},
        "command": {"type": "string"},
        "config": {"type": "object"},
        "seed": {"type": "integer"},
        "results": {},
        "cancelled": {"type": "boolean"},
        "timings": {"type": "object"},
    },
}


def validate(document, schema, what="document", error=InvalidInputError):
    """Raise ``error`` with the first schema violation, if any."""
    try:
        Draft202012Validator(schema).validate(document)
    except ValidationError as e:
        location = "/".join(str(part) for part in e.absolute_path) or "<root>"
        raise error(f"invalid {what} at {location}: {e.message}") from e
    return document
