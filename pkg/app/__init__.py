import logging

from flask import Flask
from flask_cors import CORS
from flask_restx import Api

__version__ = "1.0.0"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

api = Api(
    ordered=True,
    title="Nagell sieve RESTFUL-API",
    description="Class groups, Frey curves, Thue-Mahler systems and exponent sieves for C1*x^2 + q^alpha = y^n",
    version=__version__,
)

cors = CORS(resources={r"/*": {"origins": "*"}})


def configure_logging(level="INFO"):
    logger = logging.getLogger("app")
    if not any(getattr(h, "_nagell", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._nagell = True
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger


def create_app(config_object):
    app = Flask(__name__)
    app.config.from_object(config_object)
    configure_logging(app.config.get("LOG_LEVEL", "INFO"))

    with app.app_context():
        api.init_app(app)
        if app.config.get("ENABLE_CORS", True):
            cors.init_app(app)

    from .cli import cli
    from .routes.bounds_routes import bounds_nc
    from .routes.curves_routes import curves_nc
    from .routes.fields_routes import fields_nc
    from .routes.frey_routes import frey_nc
    from .routes.search_routes import search_nc
    from .routes.sieves_routes import sieves_nc
    from .routes.tm_routes import tm_nc

    for namespace in (fields_nc, curves_nc, frey_nc, tm_nc, sieves_nc, bounds_nc, search_nc):
        if namespace not in api.namespaces:
            api.add_namespace(namespace)
    app.cli.add_command(cli, "nagell")

    return app
