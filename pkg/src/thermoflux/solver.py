"""Explicit time integration of the three coupled systems on the torus.

The evolved pair is (rho, w) where w is the conserved thermal variable:
w = rho*theta for ideal-gas / porous-media, w = rho*theta**beta for the
generalized model.  Both equations are pure divergences, so the discrete
totals of rho and w are conserved to round-off by construction.

Positivity is never enforced: a state that loses rho > 0 (or theta > 0,
depending on configuration) aborts the run.
"""
from dataclasses import dataclass

import numpy as np

from . import thermo
from .errors import ConfigError, DegenerateStateError, NonFiniteError, PositivityError
from .grid import ScalarField, div_a_grad_b, laplacian

EULER = "euler"
RK2 = "rk2"

COMPLETED = "completed"
ABORTED_RHO = "aborted-nonpositive-rho"
ABORTED_THETA = "aborted-nonpositive-theta"
ABORTED_NONFINITE = "aborted-nonfinite"


@dataclass
class SimState:
    rho: ScalarField
    w: ScalarField    # rho*theta, or rho*theta**beta for generalized-pm
    t: float

    def theta_values(self, model):
        """Recover theta pointwise from the conserved variable."""
        ratio = self.w.values / self.rho.values
        if model.kind == thermo.GENERALIZED_PM:
            if np.any(ratio <= 0):
                raise PositivityError("w/rho must be positive to recover theta")
            return ratio ** (1.0 / model.beta_exp)
        return ratio

    @classmethod
    def from_primitive(cls, model, rho: ScalarField, theta: ScalarField, t=0.0):
        if model.kind == thermo.GENERALIZED_PM:
            w = rho.values * theta.values ** model.beta_exp
        else:
            w = rho.values * theta.values
        return cls(rho=rho, w=ScalarField(rho.grid, w), t=t)


@dataclass
class SolverConfig:
    t_end: float
    dt_safety: float = 0.5
    stride: int = 10            # observer called every `stride` accepted steps
    integrator: str = RK2
    abort_on_nonpositive_theta: bool = True

    def __post_init__(self):
        if not 0 < self.dt_safety <= 1:
            raise ConfigError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if self.integrator not in (EULER, RK2):
            raise ConfigError(f"integrator must be euler or rk2, got {self.integrator!r}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")


def _rhs_arrays(model, grid, rho, theta, w=None):
    """Right-hand sides as raw arrays; rho, theta, w are node arrays."""
    k1, k2 = model.kappa1, model.kappa2
    mk = lambda v: ScalarField(grid, v)
    kap3 = thermo.kappa3(model, rho, theta)
    if model.kind == thermo.IDEAL_GAS:
        if w is None:
            w = rho * theta
        drho = k1 * laplacian(mk(w)).values
        dw = (k1 * (k1 + k2) / k2) * div_a_grad_b(mk(theta), mk(w)).values \
            + (1.0 / k2) * div_a_grad_b(mk(kap3), mk(theta)).values
        return drho, dw
    a1 = model.alpha - 1.0  # a = alpha - 1
    flux_pot = theta * rho ** model.alpha
    drho = k1 * a1 * laplacian(mk(flux_pot)).values
    if model.kind == thermo.POROUS_MEDIA:
        dw = k1 * a1 * div_a_grad_b(mk(theta), mk(flux_pot)).values \
            + (k1 * k1 * a1 * a1 / k2) * div_a_grad_b(mk(theta * rho ** (model.alpha - 1.0)), mk(flux_pot)).values \
            + (1.0 / k2) * div_a_grad_b(mk(kap3), mk(theta)).values
        return drho, dw
    b = model.beta_exp
    denom = k2 * (b - 1.0)
    dw = k1 * a1 * div_a_grad_b(mk(theta ** b), mk(flux_pot)).values \
        + (k1 * k1 * a1 * a1 / denom) * div_a_grad_b(mk(theta * rho ** (model.alpha - 1.0)), mk(flux_pot)).values \
        + (1.0 / denom) * div_a_grad_b(mk(kap3), mk(theta)).values
    return drho, dw


def rhs(model, state: SimState):
    """(drho/dt, dw/dt) for the model's coupled system.

    Requires rho > 0 pointwise and a finite recovered theta.
    """
    if np.any(state.rho.values <= 0):
        raise DegenerateStateError("rho must be positive at every node")
    theta = state.theta_values(model)
    if not np.all(np.isfinite(theta)):
        raise NonFiniteError("recovered theta is not finite")
    grid = state.rho.grid
    drho, dw = _rhs_arrays(model, grid, state.rho.values, theta, state.w.values)
    return ScalarField(grid, drho), ScalarField(grid, dw)


def effective_diffusivities(model, rho, theta):
    """Node arrays of every effective diffusion coefficient in rhs().

    Per model (a = alpha - 1, kappa3 the conductivity at the node):
      ideal-gas:      k1*theta, (k1*(k1+k2)/k2)*theta, kappa3/(k2*rho)
      porous-media:   k1*a*alpha*theta*rho**a, k1*a*theta*rho**a,
                      (k1^2 a^2/k2)*theta*rho**(2a), kappa3/(k2*rho)
      generalized-pm: k1*a*alpha*theta*rho**a, k1*a*theta*rho**a/beta,
                      (k1^2 a^2/(k2*(beta-1)*beta))*theta**(2-beta)*rho**(2a),
                      kappa3*theta**(1-beta)/(k2*(beta-1)*beta*rho)
    """
    k1, k2 = model.kappa1, model.kappa2
    kap3 = thermo.kappa3(model, rho, theta)
    if model.kind == thermo.IDEAL_GAS:
        return [k1 * theta, (k1 * (k1 + k2) / k2) * theta, kap3 / (k2 * rho)]
    a = model.alpha - 1.0
    ra = rho ** a
    if model.kind == thermo.POROUS_MEDIA:
        return [k1 * a * model.alpha * theta * ra,
                k1 * a * theta * ra,
                (k1 * k1 * a * a / k2) * theta * ra * ra,
                kap3 / (k2 * rho)]
    b = model.beta_exp
    return [k1 * a * model.alpha * theta * ra,
            k1 * a * theta * ra / b,
            (k1 * k1 * a * a / (k2 * (b - 1.0) * b)) * theta ** (2.0 - b) * ra * ra,
            kap3 * theta ** (1.0 - b) / (k2 * (b - 1.0) * b * rho)]


def stable_dt(model, state: SimState, grid=None, dt_safety=0.5):
    """dt = dt_safety * h^2 / (2 * dim * Dmax) for the explicit schemes."""
    if grid is None:
        grid = state.rho.grid
    theta = state.theta_values(model)
    dmax = max(float(np.max(d)) for d in effective_diffusivities(model, state.rho.values, theta))
    if dmax <= 0:
        raise ConfigError("all effective diffusivities vanished; state is not positive")
    return dt_safety * grid.h ** 2 / (2.0 * grid.dim * dmax)


def _advance(model, state, dt, integrator):
    grid = state.rho.grid
    theta = state.theta_values(model)
    d1_rho, d1_w = _rhs_arrays(model, grid, state.rho.values, theta, state.w.values)
    if integrator == EULER:
        new_rho = state.rho.values + dt * d1_rho
        new_w = state.w.values + dt * d1_w
        return new_rho, new_w
    # Heun: full Euler predictor, then trapezoidal corrector
    mid_rho = state.rho.values + dt * d1_rho
    mid_w = state.w.values + dt * d1_w
    if np.any(mid_rho <= 0):
        raise DegenerateStateError("rho became non-positive in the predictor stage")
    mid = SimState(rho=ScalarField(grid, mid_rho), w=ScalarField(grid, mid_w), t=state.t + dt)
    mid_theta = mid.theta_values(model)
    d2_rho, d2_w = _rhs_arrays(model, grid, mid_rho, mid_theta, mid_w)
    new_rho = state.rho.values + (0.5 * dt) * (d1_rho + d2_rho)
    new_w = state.w.values + (0.5 * dt) * (d1_w + d2_w)
    return new_rho, new_w


def step(model, state: SimState, dt, integrator=RK2, abort_on_nonpositive_theta=True):
    """One explicit step of size dt; aborts (never clips) on lost positivity."""
    grid = state.rho.grid
    new_rho, new_w = _advance(model, state, dt, integrator)
    if not (np.all(np.isfinite(new_rho)) and np.all(np.isfinite(new_w))):
        raise NonFiniteError(f"state became non-finite at t={state.t + dt}")
    if np.any(new_rho <= 0):
        raise DegenerateStateError(f"rho became non-positive at t={state.t + dt}")
    new = SimState(rho=ScalarField(grid, new_rho), w=ScalarField(grid, new_w), t=state.t + dt)
    theta = new.theta_values(model)  # raises PositivityError for generalized-pm
    if abort_on_nonpositive_theta and np.any(theta <= 0):
        raise PositivityError(f"theta became non-positive at t={new.t}")
    return new


def run(model, initial: SimState, config: SolverConfig, observer=None):
    """Advance to t_end with adaptive stable steps.

    Calls observer(state) at t=0, after every `stride` accepted steps, and on
    the final state.  Returns (final_state, status) with status one of
    completed / aborted-nonpositive-rho / aborted-nonpositive-theta /
    aborted-nonfinite.
    """
    state = initial
    if observer is not None:
        observer(state)
    t_end = config.t_end
    tiny = 1e-14 * max(1.0, t_end)
    nstep = 0
    emitted_last = True
    while t_end - state.t > tiny:
        try:
            dt = stable_dt(model, state, dt_safety=config.dt_safety)
            dt = min(dt, t_end - state.t)
            state = step(model, state, dt, config.integrator,
                         config.abort_on_nonpositive_theta)
        except DegenerateStateError:
            return state, ABORTED_RHO
        except PositivityError:
            return state, ABORTED_THETA
        except NonFiniteError:
            return state, ABORTED_NONFINITE
        nstep += 1
        emitted_last = False
        if observer is not None and nstep % config.stride == 0:
            observer(state)
            emitted_last = True
    if observer is not None and not emitted_last:
        observer(state)
    return state, COMPLETED
