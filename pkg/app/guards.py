from functools import wraps

from flask import Response, json

from app.errors import CurveNotFoundError, NagellError, NotABadPairError


def _error(message, status):
    return Response(json.dumps({"error": message}), status=status, mimetype="application/json")


def domain_guard(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (CurveNotFoundError, NotABadPairError) as e:
            return _error(str(e), 404)
        except (NagellError, ValueError, KeyError, TypeError) as e:
            return _error(str(e), 400)

    return wrapper
