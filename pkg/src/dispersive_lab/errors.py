"""Exception types shared across the package."""


class DispersiveLabError(Exception):
    """Base class for all package errors."""


class InvalidConfig(DispersiveLabError, ValueError):
    """Malformed equation, state or run configuration."""


class ModeOverflow(DispersiveLabError, ArithmeticError):
    """A mode exponential would exceed the floating-point range.

    ``log_modulus`` is the predicted natural log of the growth factor that
    tripped the guard; ``xi`` and ``t`` identify the offending evaluation
    when known.
    """

    def __init__(self, log_modulus, xi=None, t=None, threshold=700.0):
        self.log_modulus = float(log_modulus)
        self.xi = xi
        self.t = t
        self.threshold = threshold
        where = []
        if xi is not None:
            where.append(f"xi={xi}")
        if t is not None:
            where.append(f"t={t}")
        loc = f" at {', '.join(where)}" if where else ""
        super().__init__(
            f"predicted log-modulus {self.log_modulus:.6g} exceeds {threshold:g}{loc}"
        )


class DegenerateBeta(DispersiveLabError, ArithmeticError):
    """The triangular system defining the beta corrections is singular."""
