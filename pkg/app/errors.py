class NagellError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(NagellError, ValueError):
    pass


class ConfigError(InvalidInputError):
    pass


class NotSquarefreeError(InvalidInputError):
    pass


class SingularCurveError(NagellError, ArithmeticError):
    pass


class CurveNotFoundError(NagellError, LookupError):
    pass


class RemoteDataError(NagellError):
    """The LMFDB could not be reached or answered with an unexpected payload."""


class NotABadPairError(NagellError, LookupError):
    pass


class ReportError(NagellError):
    pass
