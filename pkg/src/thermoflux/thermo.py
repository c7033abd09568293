"""The three free-energy models and the thermodynamics derived from them.

Model definitions (all with kappa1, kappa2 > 0):

  ideal-gas:       Psi = kappa1*theta*rho*ln(rho) - kappa2*rho*theta*ln(theta)
  porous-media:    Psi = kappa1*theta*rho**alpha  - kappa2*rho*theta*ln(theta),  alpha > 1
  generalized-pm:  Psi = kappa1*theta*rho**alpha  - kappa2*rho*theta**beta,      alpha, beta > 1

Derived quantities: entropy eta = -dPsi/dtheta, internal energy e = Psi +
eta*theta, pressure p = rho*dPsi/drho - Psi, and the Darcy velocity
u = -grad(p)/rho.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateStateError, DomainError
from .grid import ScalarField, gradient

IDEAL_GAS = "ideal-gas"
POROUS_MEDIA = "porous-media"
GENERALIZED_PM = "generalized-pm"

COND_IDEAL_GAS_LAW = "ideal-gas-law"   # kappa3 = kappa1*kappa2*Dtilde*theta*rho
COND_PM_LAW = "pm-law"                 # kappa3 = (alpha-1)*D*theta
COND_CONSTANT = "constant"             # kappa3 = k


@dataclass(frozen=True)
class Conductivity:
    kind: str
    value: float  # Dtilde, D, or k depending on kind

    def __post_init__(self):
        if self.kind not in (COND_IDEAL_GAS_LAW, COND_PM_LAW, COND_CONSTANT):
            raise ConfigError(f"unknown conductivity kind {self.kind!r}")
        if not self.value > 0:
            raise ConfigError(f"conductivity constant must be > 0, got {self.value}")

    @classmethod
    def ideal_gas_law(cls, d_tilde):
        return cls(COND_IDEAL_GAS_LAW, float(d_tilde))

    @classmethod
    def pm_law(cls, d):
        return cls(COND_PM_LAW, float(d))

    @classmethod
    def constant(cls, k):
        return cls(COND_CONSTANT, float(k))


@dataclass(frozen=True)
class ModelParams:
    kind: str
    kappa1: float
    kappa2: float
    conductivity: Conductivity
    alpha: float = None      # porous-media / generalized-pm only
    beta_exp: float = None   # generalized-pm only

    def __post_init__(self):
        if self.kind not in (IDEAL_GAS, POROUS_MEDIA, GENERALIZED_PM):
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if not self.kappa1 > 0:
            raise ConfigError(f"kappa1 must be > 0, got {self.kappa1}")
        if not self.kappa2 > 0:
            raise ConfigError(f"kappa2 must be > 0, got {self.kappa2}")
        if self.kind in (POROUS_MEDIA, GENERALIZED_PM):
            if self.alpha is None or not self.alpha > 1:
                raise ConfigError(f"alpha > 1 required for {self.kind}, got {self.alpha}")
        elif self.alpha is not None:
            raise ConfigError("alpha is not a parameter of the ideal-gas model")
        if self.kind == GENERALIZED_PM:
            if self.beta_exp is None or not self.beta_exp > 1:
                raise ConfigError(f"beta > 1 required for {self.kind}, got {self.beta_exp}")
        elif self.beta_exp is not None:
            raise ConfigError(f"beta is not a parameter of {self.kind}")
        if self.conductivity.kind == COND_PM_LAW and self.kind == IDEAL_GAS:
            raise ConfigError("pm-law conductivity needs a density exponent; "
                              "the ideal-gas model has none")

    @property
    def beta_ig(self):
        """Exponent-combination 1 + kappa1/kappa2 (always > 1)."""
        return 1.0 + self.kappa1 / self.kappa2

    @classmethod
    def ideal_gas(cls, kappa1, kappa2, conductivity=None, d_tilde=None):
        if conductivity is None:
            conductivity = Conductivity.ideal_gas_law(d_tilde if d_tilde is not None else 1.0)
        return cls(IDEAL_GAS, float(kappa1), float(kappa2), conductivity)

    @classmethod
    def porous_media(cls, kappa1, kappa2, alpha, conductivity=None, d=None):
        if conductivity is None:
            conductivity = Conductivity.pm_law(d if d is not None else 1.0)
        return cls(POROUS_MEDIA, float(kappa1), float(kappa2), conductivity, alpha=float(alpha))

    @classmethod
    def generalized_pm(cls, kappa1, kappa2, alpha, beta_exp, conductivity=None, d=None):
        if conductivity is None:
            conductivity = Conductivity.pm_law(d if d is not None else 1.0)
        return cls(GENERALIZED_PM, float(kappa1), float(kappa2), conductivity,
                   alpha=float(alpha), beta_exp=float(beta_exp))


@dataclass(frozen=True)
class ThermoPoint:
    psi: float        # free energy density
    eta: float        # entropy
    e: float          # internal energy (= psi + eta*theta)
    p: float          # pressure
    dp_dtheta: float
    eta_theta: float
    kappa3: float


def free_energy(model, rho, theta):
    """Psi(rho, theta), vectorized over arrays."""
    k1, k2 = model.kappa1, model.kappa2
    if model.kind == IDEAL_GAS:
        return k1 * theta * rho * np.log(rho) - k2 * rho * theta * np.log(theta)
    if model.kind == POROUS_MEDIA:
        return k1 * theta * rho ** model.alpha - k2 * rho * theta * np.log(theta)
    b = model.beta_exp
    return k1 * theta * rho ** model.alpha - k2 * rho * theta ** b


def kappa3(model, rho, theta):
    """Material conductivity at (rho, theta), vectorized."""
    c = model.conductivity
    if c.kind == COND_IDEAL_GAS_LAW:
        return model.kappa1 * model.kappa2 * c.value * theta * rho
    if c.kind == COND_PM_LAW:
        return (model.alpha - 1.0) * c.value * theta * np.ones_like(rho * theta)
    return c.value * np.ones_like(rho * theta)


def pressure(model, rho, theta):
    """p = rho*Psi_rho - Psi, vectorized."""
    k1 = model.kappa1
    if model.kind == IDEAL_GAS:
        return k1 * rho * theta
    return k1 * (model.alpha - 1.0) * theta * rho ** model.alpha


def eval_thermo(model, rho, theta):
    """All thermodynamic quantities of one model at a single (rho, theta).

    Raises DomainError for non-positive rho or theta (the logarithms in the
    free energies are undefined there).
    """
    if not rho > 0:
        raise DomainError(f"rho must be > 0, got {rho}")
    if not theta > 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    k1, k2 = model.kappa1, model.kappa2
    psi = float(free_energy(model, rho, theta))
    p = float(pressure(model, rho, theta))
    if model.kind == IDEAL_GAS:
        eta = -k1 * rho * np.log(rho) + k2 * rho * (np.log(theta) + 1.0)
        e = k2 * rho * theta
        dp_dtheta = k1 * rho
        eta_theta = k2 * rho / theta
    elif model.kind == POROUS_MEDIA:
        a = model.alpha
        eta = -k1 * rho ** a + k2 * rho * (np.log(theta) + 1.0)
        e = k2 * rho * theta
        dp_dtheta = k1 * (a - 1.0) * rho ** a
        eta_theta = k2 * rho / theta
    else:
        a, b = model.alpha, model.beta_exp
        eta = -k1 * rho ** a + k2 * b * rho * theta ** (b - 1.0)
        e = k2 * (b - 1.0) * rho * theta ** b
        dp_dtheta = k1 * (a - 1.0) * rho ** a
        eta_theta = k2 * b * (b - 1.0) * rho * theta ** (b - 2.0)
    return ThermoPoint(psi=psi, eta=float(eta), e=float(e), p=p,
                       dp_dtheta=float(dp_dtheta), eta_theta=float(eta_theta),
                       kappa3=float(kappa3(model, rho, theta)))


def darcy_velocity(model, rho: ScalarField, theta: ScalarField, grid=None):
    """u = -grad(p)/rho with the discrete central-difference pressure gradient.

    Returns a tuple of ScalarField, one component per axis.
    """
    if grid is None:
        grid = rho.grid
    if np.any(rho.values <= 0):
        raise DegenerateStateError("rho must be positive at every node")
    p = ScalarField(grid, pressure(model, rho.values, theta.values))
    return tuple(ScalarField(grid, -gp.values / rho.values) for gp in gradient(p))
