"""Auxiliary-variable machinery: exponents, weight-function ODE branches,
sign constants, and density thresholds.

Ideal gas (conductivity proportional to theta*rho): the weight functions are
exact power laws f = f(1)*rho**gamma with

    gamma_pm = (-(beta + Dt) +- sqrt(beta^2 + 2*(beta-2)*Dt + Dt^2)) / 2,
    beta = 1 + kappa1/kappa2,

the two roots of gamma^2 + (beta + Dt)*gamma + Dt = 0.  The sign constants
c_pm make Gt_pm = c_pm * f * rho, with c_plus < 0 (maximum principle for
theta*rho**(1+gamma_plus)) and c_minus > 0 (minimum principle for
theta*rho**(1+gamma_minus)).

Porous media (rescaled density, constants a = alpha-1, kappa2, D): the weight
ODE is f' = f*Psi_pm(rho) where Psi_pm are the two roots of the quadratic

    Q(rho, x) = kappa2*rho^(a+3) * x^2
              + (a*rho^(2a+2) + kappa2*(1-a)*rho^(a+2) + D*rho) * x
              + (D - kappa2*a*rho^(a+1) - a^2*rho^(2a+1)) = 0.

Numerical notes.  Direct evaluation of the explicit root formula cancels
catastrophically for the plus branch at both density extremes, so everything
is computed through

    S_pm := kappa2*(a+1)*rho^(a+1) - a*rho^(2a+1) - D +- sqrt(Delta),
    Psi*rho + 1 = S / (2*kappa2*rho^(a+1)),

with S_plus obtained from the conjugate identity
S_plus = 4*kappa2*a*(a+1)*rho^(3a+2) / (sqrt(Delta) + D + W),
W = a*rho^(2a+1) - kappa2*(a+1)*rho^(a+1) (the denominator is strictly
positive for rho > 0).  The Gt evaluation still cancels between its first two
terms at extreme densities; when the computed |Gt| falls below 1e-8 of the
largest term the evaluation escalates to mpmath (40, then 80 digits).
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np

from .errors import (AnalysisInconsistencyError, ConfigError, DomainError,
                     QuadratureError, ThresholdNotFoundError)

BRANCH_PLUS = "plus"
BRANCH_MINUS = "minus"


# --- ideal gas ------------------------------------------------------------

@dataclass(frozen=True)
class IdealGasExponents:
    beta: float
    d_tilde: float
    gamma_plus: float
    gamma_minus: float
    disc: float      # beta^2 + 2*(beta-2)*Dt + Dt^2 = (Dt+beta-2)^2 + 4*(beta-1)
    c_plus: float    # Gt_plus = c_plus * f * rho, always negative
    c_minus: float   # Gt_minus = c_minus * f * rho, always positive


def exact_gamma_residual(gamma, beta, d_tilde):
    """gamma^2 + (beta + Dt)*gamma + Dt in exact rational arithmetic.

    A float64 evaluation of the polynomial carries round-off of order
    eps*gamma^2, which swamps the true residual of a well-computed root.
    """
    g, b, dt = Fraction(gamma), Fraction(beta), Fraction(d_tilde)
    return float(g * g + (b + dt) * g + dt)


def _polish_root(gamma, beta, d_tilde):
    # one or two exact-arithmetic Newton steps land on the correctly
    # rounded float64 root
    for _ in range(2):
        g, b, dt = Fraction(gamma), Fraction(beta), Fraction(d_tilde)
        q = g * g + (b + dt) * g + dt
        qp = 2 * g + b + dt
        if qp == 0:
            break
        refined = float(g - q / qp)
        if refined == gamma:
            break
        gamma = refined
    return gamma


def gamma_exponents(kappa1, kappa2, d_tilde):
    """Exponents gamma_pm and sign constants for the ideal-gas weights."""
    if not (kappa1 > 0 and kappa2 > 0 and d_tilde > 0):
        raise ConfigError("kappa1, kappa2 and d_tilde must all be positive")
    beta = 1.0 + kappa1 / kappa2
    dt = float(d_tilde)
    disc = beta * beta + 2.0 * (beta - 2.0) * dt + dt * dt
    sq = math.sqrt(disc)
    # gamma_plus via the rationalized root: no cancellation for small Dt
    gamma_minus = _polish_root(-(beta + dt + sq) / 2.0, beta, dt)
    gamma_plus = _polish_root(-2.0 * dt / (beta + dt + sq), beta, dt)
    c_plus = kappa1 * (dt * (1.0 + gamma_plus) + beta * gamma_plus) / (1.0 + gamma_plus)
    c_minus = kappa2 * (dt * (1.0 + gamma_minus) + beta * gamma_minus) / (1.0 + gamma_minus)
    return IdealGasExponents(beta=beta, d_tilde=dt, gamma_plus=gamma_plus,
                             gamma_minus=gamma_minus, disc=disc,
                             c_plus=c_plus, c_minus=c_minus)


def gtilde_ideal_signs(exp: IdealGasExponents):
    """Signs of the two ideal-gas Gt constants: always (-1, +1).

    A failed sign check signals an implementation bug, never a property of
    the model, hence the dedicated exception.
    """
    if not exp.c_plus < 0:
        raise AnalysisInconsistencyError(f"c_plus = {exp.c_plus} should be negative")
    if not exp.c_minus > 0:
        raise AnalysisInconsistencyError(f"c_minus = {exp.c_minus} should be positive")
    return (-1, 1)


# --- porous media branches --------------------------------------------------

@dataclass(frozen=True)
class PMBranchParams:
    a: float       # alpha - 1
    kappa2: float
    d: float       # conductivity constant D

    def __post_init__(self):
        if not (self.a > 0 and self.kappa2 > 0 and self.d > 0):
            raise ConfigError("a, kappa2 and d must all be positive")


def _s_branches(rho, a, k2, d):
    """Vectorized stable S_plus, S_minus and sqrt(Delta)."""
    W = a * rho ** (2 * a + 1) - k2 * (a + 1) * rho ** (a + 1)
    delta = (d + W) ** 2 + 4 * k2 * a * (a + 1) * rho ** (3 * a + 2)
    sq = np.sqrt(delta)
    quad_term = 4 * k2 * a * (a + 1) * rho ** (3 * a + 2)
    s_plus = quad_term / (sq + (d + W))
    # np.where evaluates both sides; guard the conjugate denominator, which
    # is only used (and only nonzero) where d + W < 0
    conj_den = np.where(d + W < 0, sq - (d + W), 1.0)
    s_minus = np.where(d + W >= 0, -(sq + (d + W)), -quad_term / conj_den)
    return s_plus, s_minus, sq, delta


def psi_branches(rho, params: PMBranchParams):
    """(Psi_plus, Psi_minus, Delta) at rho; vectorized over arrays."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho <= 0):
        raise DomainError("rho must be positive")
    a, k2, d = params.a, params.kappa2, params.d
    s_plus, s_minus, _, delta = _s_branches(rho, a, k2, d)
    two_k2_r = 2 * k2 * rho ** (a + 1)
    psi_plus = (s_plus / two_k2_r - 1.0) / rho
    psi_minus = (s_minus / two_k2_r - 1.0) / rho
    if rho.ndim == 0:
        return float(psi_plus), float(psi_minus), float(delta)
    return psi_plus, psi_minus, delta


def psi_prime_branches(rho, params: PMBranchParams):
    """(Psi_plus', Psi_minus') by implicit differentiation of the quadratic.

    Psi' = -(A'*Psi^2 + B'*Psi + C') / (2*A*Psi + B) where the denominator
    equals +-rho*sqrt(Delta) per branch (never zero since Delta > 0).
    """
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho <= 0):
        raise DomainError("rho must be positive")
    a, k2, d = params.a, params.kappa2, params.d
    psi_plus, psi_minus, delta = psi_branches(rho, params)
    sq = np.sqrt(delta)
    a1p = k2 * (a + 3) * rho ** (a + 2)
    b1p = a * (2 * a + 2) * rho ** (2 * a + 1) + k2 * (1 - a) * (a + 2) * rho ** (a + 1) + d
    c1p = -k2 * a * (a + 1) * rho ** a - a * a * (2 * a + 1) * rho ** (2 * a)
    dp_plus = -(a1p * np.asarray(psi_plus) ** 2 + b1p * np.asarray(psi_plus) + c1p) / (rho * sq)
    dp_minus = -(a1p * np.asarray(psi_minus) ** 2 + b1p * np.asarray(psi_minus) + c1p) / (-rho * sq)
    if rho.ndim == 0:
        return float(dp_plus), float(dp_minus)
    return dp_plus, dp_minus


def quadratic_residual(rho, psi, params: PMBranchParams):
    """Relative residual of the branch quadratic at (rho, psi)."""
    rho = np.asarray(rho, dtype=np.float64)
    psi = np.asarray(psi, dtype=np.float64)
    a, k2, d = params.a, params.kappa2, params.d
    A = k2 * rho ** (a + 3)
    B = a * rho ** (2 * a + 2) + k2 * (1 - a) * rho ** (a + 2) + d * rho
    C = d - k2 * a * rho ** (a + 1) - a * a * rho ** (2 * a + 1)
    num = A * psi * psi + B * psi + C
    scale = np.abs(A * psi * psi) + np.abs(B * psi) + np.abs(C)
    # scale vanishes only at psi = 0 with C = 0, i.e. an exact root
    return np.abs(num) / np.where(scale > 0, scale, 1.0)


# --- adaptive Gauss-Kronrod quadrature --------------------------------------
#
# 15-point Kronrod extension of 7-point Gauss on [-1, 1]; the |K15 - G7|
# difference drives the subdivision.

_KRONROD_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813])
_KRONROD_W = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529])
_GAUSS_W = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870])


def _gk15(f, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fx = f(mid + half * _KRONROD_X)
    k15 = half * float(np.dot(_KRONROD_W, fx))
    g7 = half * float(np.dot(_GAUSS_W, fx[1::2]))
    return k15, abs(k15 - g7)


def adaptive_quadrature(f, lo, hi, rtol=1e-10, atol=1e-13, max_depth=48):
    """Adaptive composite Gauss-Kronrod integral of a vectorized integrand."""
    if lo == hi:
        return 0.0
    total = 0.0
    stack = [(lo, hi, 0)]
    while stack:
        a, b, depth = stack.pop()
        val, err = _gk15(f, a, b)
        if err <= max(atol, rtol * abs(val)) or depth >= max_depth:
            if depth >= max_depth and err > 1e-6 * max(1.0, abs(val)):
                raise QuadratureError(
                    f"no convergence on [{a}, {b}] after depth {depth}: err={err}")
            total += val
        else:
            m = 0.5 * (a + b)
            stack.append((a, m, depth + 1))
            stack.append((m, b, depth + 1))
    return total


# --- weight functions --------------------------------------------------------

@dataclass
class WeightTable:
    branch: str
    rho0: float
    f0: float
    rho: np.ndarray
    ln_f: np.ndarray   # exact carrier; f can overflow for the minus branch
    f: np.ndarray
    psi: np.ndarray    # log-derivative d(ln f)/d(rho) at the samples

    def __post_init__(self):
        if self.branch == BRANCH_MINUS and np.any(np.diff(self.ln_f) >= 0):
            raise AnalysisInconsistencyError("minus-branch weight must decrease strictly")

    def interp_ln_f(self, rho):
        """Piecewise-linear interpolation of ln f in ln rho."""
        return np.interp(np.log(rho), np.log(self.rho), self.ln_f)


def weight_function(branch, params: PMBranchParams, rho0, f0, rho_targets,
                    rtol=1e-10):
    """Tabulate f(rho) = f0 * exp(int_{rho0}^{rho} Psi_branch) at the targets.

    The integral runs in the log-density variable s = ln(rho) (integrand
    exp(s)*Psi(exp(s))) with adaptive Gauss-Kronrod refinement, which
    resolves the minus branch's essential singularity near rho = 0.
    """
    if branch not in (BRANCH_PLUS, BRANCH_MINUS):
        raise ConfigError(f"branch must be plus or minus, got {branch!r}")
    if not (rho0 > 0 and f0 > 0):
        raise ConfigError("rho0 and f0 must be positive")
    targets = np.unique(np.atleast_1d(np.asarray(rho_targets, dtype=np.float64)))
    if np.any(targets <= 0):
        raise DomainError("rho targets must be positive")

    idx = 0 if branch == BRANCH_PLUS else 1

    def integrand(s):
        r = np.exp(s)
        return np.asarray(psi_branches(r, params)[idx]) * r

    points = np.unique(np.concatenate([targets, [rho0]]))
    s_points = np.log(points)
    anchor = int(np.searchsorted(points, rho0))
    # cumulative log-weight relative to the anchor, so f(rho0) = f0 exactly
    rel = np.empty_like(points)
    rel[anchor] = 0.0
    for i in range(anchor + 1, len(points)):
        rel[i] = rel[i - 1] + adaptive_quadrature(integrand, s_points[i - 1], s_points[i], rtol=rtol)
    for i in range(anchor - 1, -1, -1):
        rel[i] = rel[i + 1] - adaptive_quadrature(integrand, s_points[i], s_points[i + 1], rtol=rtol)

    # targets are unique and ascending, so this indexes rel directly
    rel_t = rel[np.searchsorted(points, targets)]
    psi_t = np.atleast_1d(np.asarray(psi_branches(targets, params)[idx]))
    with np.errstate(over="ignore"):
        f_t = f0 * np.exp(rel_t)
    return WeightTable(branch=branch, rho0=float(rho0), f0=float(f0),
                       rho=targets, ln_f=math.log(f0) + rel_t, f=f_t, psi=psi_t)


# --- Gt evaluation -----------------------------------------------------------

class _FloatBackend:
    sqrt = staticmethod(math.sqrt)
    to = staticmethod(float)


class _MpBackend:
    sqrt = staticmethod(mp.sqrt)
    to = staticmethod(mp.mpf)


def _gtilde_terms(rho, a, k2, d, plus, be):
    """The four terms of the reduced Gt expression with f normalized to 1.

    Generic over the math backend `be` so the same formulas run in float64
    and in mpmath when precision escalation is needed.
    """
    rho, a, k2, d = be.to(rho), be.to(a), be.to(k2), be.to(d)
    one = rho / rho
    W = a * rho ** (2 * a + 1) - k2 * (a + 1) * rho ** (a + 1)
    Wp = a * (2 * a + 1) * rho ** (2 * a) - k2 * (a + 1) * (a + 1) * rho ** a
    delta = (d + W) ** 2 + 4 * k2 * a * (a + 1) * rho ** (3 * a + 2)
    sq = be.sqrt(delta)
    deltap = 2 * (d + W) * Wp + 4 * k2 * a * (a + 1) * (3 * a + 2) * rho ** (3 * a + 1)
    if plus:
        Q = sq + (d + W)
        Qp = deltap / (2 * sq) + Wp
        S = 4 * k2 * a * (a + 1) * rho ** (3 * a + 2) / Q
        Sp = 4 * k2 * a * (a + 1) * ((3 * a + 2) * rho ** (3 * a + 1) * Q - rho ** (3 * a + 2) * Qp) / (Q * Q)
        P = S / 2 + a * rho ** (2 * a + 1) + d
    else:
        if d + W >= 0:
            S = -(sq + (d + W))
            Sp = -(deltap / (2 * sq) + Wp)
        else:
            Q = sq - (d + W)
            Qp = deltap / (2 * sq) - Wp
            S = -4 * k2 * a * (a + 1) * rho ** (3 * a + 2) / Q
            Sp = -4 * k2 * a * (a + 1) * ((3 * a + 2) * rho ** (3 * a + 1) * Q - rho ** (3 * a + 2) * Qp) / (Q * Q)
        # P_minus from the conjugate identity Delta = Lam^2 - 4*k2*(a+1)*d*rho^(a+1)
        lam = a * rho ** (2 * a + 1) + k2 * (a + 1) * rho ** (a + 1) + d
        P = 2 * k2 * (a + 1) * d * rho ** (a + 1) / (sq + lam)
    eps = S / (2 * k2 * rho ** (a + 1))         # = Psi*rho + 1
    epsp = (Sp * rho - (a + 1) * S) / (2 * k2 * rho ** (a + 2))
    R = (eps - one) / eps + epsp * rho / (eps * eps) - 2
    t1 = -a * P * R
    t2 = 2 * a ** 3 * (a + 1) * rho ** (2 * a + 1) / (eps * eps)
    t3 = (2 * k2 * k2 * a * (a * a - 1) * rho ** (2 * a + 2)
          - 2 * k2 * a * a * (4 * a + 3) * rho ** (3 * a + 2)) / S
    t4 = a * a * rho ** (2 * a + 1) - k2 * a * (2 * a + 1) * rho ** (a + 1) + a * d
    return t1, t2, t3, t4


def gtilde_pm(branch, rho, params: PMBranchParams):
    """Gt for one branch at rho, with the weight normalized to f(rho) = 1.

    Gt is homogeneous of degree one in f, so signs and zero locations do not
    depend on the normalization.  Escalates to mpmath when the four terms
    cancel below 1e-8 of their largest magnitude.
    """
    if not rho > 0:
        raise DomainError("rho must be positive")
    if branch not in (BRANCH_PLUS, BRANCH_MINUS):
        raise ConfigError(f"branch must be plus or minus, got {branch!r}")
    plus = branch == BRANCH_PLUS
    a, k2, d = params.a, params.kappa2, params.d
    terms = _gtilde_terms(rho, a, k2, d, plus, _FloatBackend)
    val = math.fsum(terms)
    magnitude = max(abs(t) for t in terms)
    if abs(val) >= 1e-8 * magnitude:
        return val
    for dps in (40, 80):
        with mp.workdps(dps):
            terms = _gtilde_terms(rho, a, k2, d, plus, _MpBackend)
            val = terms[0] + terms[1] + terms[2] + terms[3]
            magnitude = max(abs(t) for t in terms)
            if abs(val) >= mp.mpf(10) ** (8 - dps) * magnitude:
                return float(val)
    return float(val)


@dataclass
class ThresholdResult:
    rho_bar: float          # largest zero of Gt_plus
    rho_under: float        # smallest zero of Gt_plus
    g_minus_positive: bool  # Gt_minus > 0 at every scan point (recorded, not asserted)
    zeros: list
    profile: list           # (rho, sign of Gt_plus) over the scan


def find_thresholds(params: PMBranchParams, rho_min=1e-6, rho_max=1e6, points=200,
                    rel_tol=1e-8):
    """Scan Gt_plus for sign changes and refine each by bisection.

    rho_under is the smallest zero, rho_bar the largest (equal when Gt_plus
    has a single zero).  Raises ThresholdNotFoundError, carrying the scan's
    sign profile, when no sign change lies in the range.
    """
    grid_rho = np.geomspace(rho_min, rho_max, points)
    g_plus = [gtilde_pm(BRANCH_PLUS, r, params) for r in grid_rho]
    profile = [(float(r), 1 if g > 0 else (-1 if g < 0 else 0))
               for r, g in zip(grid_rho, g_plus)]
    brackets = [(grid_rho[i], grid_rho[i + 1])
                for i in range(points - 1)
                if profile[i][1] * profile[i + 1][1] < 0]
    if not brackets:
        raise ThresholdNotFoundError(
            f"no sign change of Gt_plus in [{rho_min}, {rho_max}]", profile=profile)
    zeros = []
    for lo, hi in brackets:
        glo = gtilde_pm(BRANCH_PLUS, lo, params)
        while hi / lo - 1.0 > rel_tol:
            mid = math.sqrt(lo * hi)
            gm = gtilde_pm(BRANCH_PLUS, mid, params)
            if gm == 0:
                lo = hi = mid
                break
            if (gm > 0) == (glo > 0):
                lo, glo = mid, gm
            else:
                hi = mid
        zeros.append(math.sqrt(lo * hi))
    g_minus_positive = all(gtilde_pm(BRANCH_MINUS, r, params) > 0 for r in grid_rho)
    return ThresholdResult(rho_bar=max(zeros), rho_under=min(zeros),
                           g_minus_positive=g_minus_positive,
                           zeros=zeros, profile=profile)
