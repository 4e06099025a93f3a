"""Structured errors shared across the package.

Every error that a driver run may surface carries machine-readable details
so the CLI can emit a single ``key=value`` line on standard error.
"""


class BochnerError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = dict(details)

    def detail_line(self):
        parts = [f"error={self.code}"]
        parts += [f"{k}={_fmt(v)}" for k, v in sorted(self.details.items())]
        return " ".join(parts)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value).replace(" ", "_")


class ConditionViolation(BochnerError):
    """A hypothesis of one of the checked estimates fails on the given data."""

    code = "condition-violation"

    def __init__(self, message, condition, **details):
        super().__init__(message, condition=condition, **details)
        self.condition = condition


class SectorError(BochnerError):
    """Spectral parameter lies outside the admissible sector."""

    code = "sector"


class SingularityError(BochnerError):
    """Resolvent requested at (or numerically on top of) a spectral point."""

    code = "singular"


class NonContractionError(BochnerError):
    """The perturbation series does not contract; the shift is too small."""

    code = "non-contraction"
