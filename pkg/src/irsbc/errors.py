"""Exception types raised across the package."""


class IrsbcError(Exception):
    """Base class for all errors raised by :mod:`irsbc`."""


class DimensionMismatch(IrsbcError, ValueError):
    pass


class NotPositiveDefinite(IrsbcError, ArithmeticError):
    pass


class RankDeficient(IrsbcError, ArithmeticError):
    pass


class IndexOutOfRange(IrsbcError, IndexError):
    pass


class ZeroChannel(IrsbcError, ValueError):
    pass


class ZeroGain(IrsbcError, ValueError):
    pass


class InvalidDistance(IrsbcError, ValueError):
    pass


class NonPsdCovariance(IrsbcError, ValueError):
    pass


class TooManyUsers(IrsbcError, ValueError):
    pass


class OrthogonalityViolated(IrsbcError, ValueError):
    pass


class BudgetExceeded(IrsbcError, RuntimeError):
    pass


class Infeasible(IrsbcError, ValueError):
    pass


class DomainError(IrsbcError, ValueError):
    pass


class InvalidDims(IrsbcError, ValueError):
    pass


class ConfigError(IrsbcError, ValueError):
    """Invalid scenario / run configuration.

    ``field`` names the offending key (dotted path) and ``line``/``column``
    locate JSON syntax errors when known.
    """

    def __init__(self, message, field=None, line=None, column=None):
        super().__init__(message)
        self.field = field
        self.line = line
        self.column = column

    def to_dict(self):
        out = {"error": type(self).__name__, "message": str(self)}
        if self.field is not None:
            out["field"] = self.field
        if self.line is not None:
            out["line"] = self.line
            out["column"] = self.column
        return out
