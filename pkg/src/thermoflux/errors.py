"""Exception hierarchy shared across the package."""


class ThermofluxError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(ThermofluxError):
    """Invalid model parameters or run configuration."""


class DomainError(ThermofluxError):
    """Thermodynamic evaluation outside its domain (rho <= 0 or theta <= 0)."""


class GridShapeError(ThermofluxError):
    """Field/grid mismatch passed to a lattice operator."""


class DegenerateStateError(ThermofluxError):
    """A state lost positivity of rho (or w/rho) where the solver requires it."""


class NonFiniteError(ThermofluxError):
    """A field stopped being finite (overflow or NaN)."""


class PositivityError(ThermofluxError):
    """theta <= 0 where a diagnostic requires positive temperature."""


class AnalysisInconsistencyError(ThermofluxError):
    """A numeric result contradicts an identity the analysis guarantees.

    Signals an implementation bug, not a property of the models.
    """


class QuadratureError(ThermofluxError):
    """Adaptive quadrature failed to reach its tolerance."""


class ThresholdNotFoundError(ThermofluxError):
    """No sign change located in the scan range; carries the sign profile."""

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile if profile is not None else []
