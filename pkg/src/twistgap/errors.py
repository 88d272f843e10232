"""Exception types shared across the package.

The CLI maps them onto exit codes: domain/phase problems -> 3, size caps -> 4.
"""


class TwistgapError(Exception):
    exit_code = 1


class DomainError(TwistgapError, ValueError):
    """Parameters outside the region where a formula applies."""

    exit_code = 3


class PhaseError(DomainError):
    """Requested quantity needs the disordered phase."""


class SizeCapError(TwistgapError):
    exit_code = 4


class QuadratureError(TwistgapError):
    def __init__(self, estimate, error):
        self.estimate = estimate
        self.error = error
        super().__init__(f"quadrature did not converge: best estimate {estimate!r}, error {error!r}")


class TruncationError(TwistgapError):
    def __init__(self, tail, suggested=None):
        self.tail = tail
        self.suggested = suggested
        msg = f"character expansion tail {tail:.3g} not below tolerance"
        if suggested:
            msg += f"; try cutoff >= {suggested}"
        super().__init__(msg)


class ConsistencyError(TwistgapError):
    """An internal invariant failed (normally signals truncation or quadrature trouble)."""


class TunnelingError(TwistgapError):
    def __init__(self, msg, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(msg)
