"""Exception hierarchy shared by all modules.

Each CLI-visible error class maps to one process exit code (see cli.py).
"""

from __future__ import annotations


class RamanGnError(Exception):
    """Base class for all errors raised by this package."""


class UnitError(RamanGnError, ValueError):
    """Unknown or unsupported engineering-unit tag."""


class ScenarioError(RamanGnError):
    """Scenario file could not be parsed (syntax, unknown key, bad value)."""


class ValidationError(RamanGnError):
    """A domain object violates its invariants.

    ``diagnostics`` lists every violated invariant with index context.
    """

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class NumericalError(RamanGnError):
    """A numerical routine failed to produce a trustworthy result."""


class DivergenceError(NumericalError):
    """The ODE integration produced a non-finite (or non-positive) state."""

    def __init__(self, message, z_position=None):
        self.z_position = z_position
        super().__init__(message)


class DegenerateTiltError(NumericalError):
    """The fitted tilt factor T is (numerically) zero: the linearized
    profile crosses zero inside the span and the closed form is undefined."""


class DegenerateDispersionError(NumericalError):
    """A phase-mismatch factor vanishes (zero-dispersion channel pair)."""


class ProfileDomainError(NumericalError):
    """The linearized power profile became non-positive inside the
    integration domain; the quadrature oracle refuses to continue."""


class GateFailure(RamanGnError):
    """An accuracy gate requested on the command line was not met."""
