"""Built-in invariant suite behind `thermoflux check`.

Each check returns (ok, detail).  The suite covers the library invariants at
desk scale: thermodynamic identities, discrete conservation/adjointness,
convergence orders, exponent and branch algebra, weight-function structure,
threshold signs, entropy positivity, extremum envelopes, and determinism.
"""
import math
import tempfile
from pathlib import Path

import numpy as np

from . import analysis, diagnostics, solver, thermo
from .config import parse_config, serialize
from .grid import PeriodicGrid, ScalarField, div_a_grad_b, gradient, laplacian, total
from .thermo import ModelParams


def _models():
    return [
        ModelParams.ideal_gas(1.0, 1.0, d_tilde=1.0),
        ModelParams.porous_media(1.0, 1.0, alpha=2.0, d=1.0),
        ModelParams.generalized_pm(1.0, 1.0, alpha=2.0, beta_exp=2.0, d=1.0),
    ]


def _rng():
    return np.random.default_rng(20260808)


def check_thermo_identities():
    rng = _rng()
    worst = 0.0
    eps = 1e-5
    for model in _models():
        for _ in range(200):
            rho, theta = rng.uniform(0.1, 10.0, 2)
            tp = thermo.eval_thermo(model, rho, theta)
            worst = max(worst, abs(tp.e - (tp.psi + tp.eta * theta)) / max(abs(tp.e), 1e-30))
            fd_eta = -(thermo.free_energy(model, rho, theta + eps)
                       - thermo.free_energy(model, rho, theta - eps)) / (2 * eps)
            if abs(tp.eta - fd_eta) > 1e-6:
                return False, f"eta vs -dPsi/dtheta off by {abs(tp.eta - fd_eta)}"
            fd_psirho = (thermo.free_energy(model, rho + eps, theta)
                         - thermo.free_energy(model, rho - eps, theta)) / (2 * eps)
            if abs(tp.p - (fd_psirho * rho - tp.psi)) > 1e-4:
                return False, f"p vs rho*Psi_rho - Psi off at ({rho}, {theta})"
            eta_p = thermo.eval_thermo(model, rho + eps, theta).eta
            eta_m = thermo.eval_thermo(model, rho - eps, theta).eta
            fd_eta_rho = (eta_p - eta_m) / (2 * eps)
            if abs(tp.dp_dtheta - (tp.eta - fd_eta_rho * rho)) > 1e-4:
                return False, f"dp/dtheta vs eta - rho*eta_rho off at ({rho}, {theta})"
    if worst > 1e-12:
        return False, f"Legendre identity relative error {worst}"
    return True, f"Legendre rel err {worst:.2e}"


def check_grid_conservation_adjointness():
    rng = _rng()
    for dim in (1, 2):
        grid = PeriodicGrid(dim=dim, n=16, length=2.0)
        for _ in range(20):
            a = ScalarField(grid, rng.uniform(0.5, 2.0, grid.shape))
            b = ScalarField(grid, rng.uniform(-1.0, 1.0, grid.shape))
            c = ScalarField(grid, rng.uniform(-1.0, 1.0, grid.shape))
            if abs(total(div_a_grad_b(a, b))) > 1e-12:
                return False, f"divergence theorem violated in {dim}D"
            lhs = float(np.sum(b.values * div_a_grad_b(a, c).values))
            rhs = float(np.sum(c.values * div_a_grad_b(a, b).values))
            if abs(lhs - rhs) > 1e-10 * max(1.0, abs(lhs)):
                return False, f"flux operator not self-adjoint in {dim}D"
    return True, "total(div)=0 and adjointness hold"


def check_operator_convergence():
    errs = []
    for n in (64, 128, 256):
        grid = PeriodicGrid(dim=1, n=n, length=2 * math.pi)
        (x,) = grid.meshgrid()
        f = ScalarField(grid, np.sin(x))
        errs.append(float(np.max(np.abs(laplacian(f).values + np.sin(x)))))
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    if not (3.5 < r1 < 4.5 and 3.5 < r2 < 4.5):
        return False, f"laplacian refinement ratios {r1:.2f}, {r2:.2f}"
    return True, f"laplacian error ratios {r1:.2f}, {r2:.2f}"


def check_conservation_and_stationarity():
    for model in _models():
        grid = PeriodicGrid(dim=1, n=64, length=2 * math.pi)
        (x,) = grid.meshgrid()
        rho = ScalarField(grid, 1.0 + 0.1 * np.sin(x))
        theta = ScalarField(grid, 1.0 + 0.1 * np.cos(x))
        state = solver.SimState.from_primitive(model, rho, theta)
        m0, w0 = total(state.rho), total(state.w)
        for _ in range(1000):
            dt = solver.stable_dt(model, state, dt_safety=0.5)
            state = solver.step(model, state, dt)
        if abs(total(state.rho) - m0) / m0 > 1e-11:
            return False, f"mass drift for {model.kind}"
        if abs(total(state.w) - w0) / abs(w0) > 1e-11:
            return False, f"w drift for {model.kind}"
        uniform = solver.SimState.from_primitive(
            model, ScalarField.full(grid, 1.2), ScalarField.full(grid, 0.8))
        stepped = solver.step(model, uniform, 1e-4)
        if not (np.allclose(stepped.rho.values, 1.2, rtol=0, atol=1e-14)
                and np.max(np.abs(stepped.w.values - uniform.w.values)) < 1e-14):
            return False, f"uniform state drifted for {model.kind}"
    return True, "mass/w conserved to 1e-11 over 1000 steps; constants stationary"


def check_self_convergence():
    model = _models()[0]
    grid = PeriodicGrid(dim=1, n=32, length=2 * math.pi)
    (x,) = grid.meshgrid()
    state0 = solver.SimState.from_primitive(
        model, ScalarField(grid, 1.0 + 0.1 * np.sin(x)), ScalarField(grid, 1.0 + 0.1 * np.cos(x)))
    t_end = 0.02

    def run_fixed(dt, integrator):
        state, n = state0, round(t_end / dt)
        for _ in range(n):
            state = solver.step(model, state, dt, integrator)
        return state.rho.values

    ref = run_fixed(t_end / 512, solver.RK2)
    orders = {}
    for integ, lo, hi in ((solver.RK2, 1.8, 2.2), (solver.EULER, 0.8, 1.2)):
        e1 = np.max(np.abs(run_fixed(t_end / 16, integ) - ref))
        e2 = np.max(np.abs(run_fixed(t_end / 32, integ) - ref))
        order = math.log2(e1 / e2)
        orders[integ] = order
        if not lo <= order <= hi:
            return False, f"{integ} observed order {order:.2f}"
    return True, f"rk2 order {orders['rk2']:.2f}, euler order {orders['euler']:.2f}"


def check_equilibration():
    model = _models()[0]
    grid = PeriodicGrid(dim=1, n=64, length=2 * math.pi)
    (x,) = grid.meshgrid()
    state = solver.SimState.from_primitive(
        model, ScalarField(grid, 1.0 + 0.05 * np.sin(x)), ScalarField(grid, 1.0 + 0.05 * np.cos(x)))
    norms = []
    t_end, t = 1.0, 0.0
    while t < t_end:
        dt = min(solver.stable_dt(model, state, dt_safety=0.5), t_end - t)
        state = solver.step(model, state, dt)
        t = state.t
        theta = ScalarField(grid, state.theta_values(model))
        norms.append((t, float(np.linalg.norm(gradient(state.rho)[0].values)),
                      float(np.linalg.norm(gradient(theta)[0].values))))
    mid_rho = next(v for s, v, _ in norms if s >= t_end / 2)
    mid_theta = next(v for s, _, v in norms if s >= t_end / 2)
    if not (norms[-1][1] < mid_rho and norms[-1][2] < mid_theta):
        return False, "gradient norms did not decay over the final half"
    return True, "grad rho and grad theta norms decay after transient"


def check_exponent_algebra():
    rng = _rng()
    for _ in range(1000):
        beta = rng.uniform(1.0 + 1e-6, 10.0)
        kappa2 = rng.uniform(0.1, 10.0)
        dt_ = rng.uniform(1e-6, 10.0)
        e = analysis.gamma_exponents((beta - 1.0) * kappa2, kappa2, dt_)
        for g in (e.gamma_plus, e.gamma_minus):
            if abs(analysis.exact_gamma_residual(g, e.beta, e.d_tilde)) > 1e-13:
                return False, f"quadratic residual too large at beta={beta}, Dt={dt_}"
        if abs(e.gamma_plus * e.gamma_minus - e.d_tilde) > 1e-12:
            return False, "product identity gamma+*gamma- = Dt fails"
        if not (-1 < e.gamma_plus < 0 and e.gamma_minus < -1):
            return False, "exponent interval claims fail"
        ident = (e.d_tilde + e.beta - 2.0) ** 2 + 4.0 * (e.beta - 1.0)
        if abs(e.disc - ident) > 1e-12 * max(1.0, abs(ident)):
            return False, "discriminant identity fails"
        if e.disc < 4.0 * (e.beta - 1.0) - 1e-12:
            return False, "disc >= 4(beta-1) fails"
        if not (e.c_plus < 0 and e.c_minus > 0):
            return False, f"sign constants wrong at beta={beta}, Dt={dt_}"
    return True, "residuals, product, intervals and signs hold over 1000 samples"


def check_branch_algebra():
    rng = _rng()
    for _ in range(1000):
        params = analysis.PMBranchParams(a=rng.uniform(0.1, 5.0),
                                         kappa2=rng.uniform(0.1, 10.0),
                                         d=rng.uniform(0.01, 10.0))
        rho = 10.0 ** rng.uniform(-3, 3)
        pp, pm, delta = analysis.psi_branches(rho, params)
        if not delta > 0:
            return False, f"Delta not positive at {params}"
        if not pp > pm:
            return False, "branch ordering Psi+ > Psi- fails"
        for p in (pp, pm):
            if analysis.quadratic_residual(rho, p, params) > 1e-10:
                return False, f"branch residual above 1e-10 at {params}, rho={rho}"
    return True, "Delta > 0, ordering and residual < 1e-10 over 1000 samples"


def check_weight_structure():
    params = analysis.PMBranchParams(a=1.0, kappa2=1.0, d=1.0)
    targets = np.geomspace(1e-4, 1e4, 161)
    wplus = analysis.weight_function("plus", params, 1.0, 1.0, targets)
    wminus = analysis.weight_function("minus", params, 1.0, 1.0, targets)
    if abs(analysis.weight_function("plus", params, 2.0, 3.0, [2.0]).ln_f[0] - math.log(3.0)) > 1e-14:
        return False, "f(rho0) != f0"
    if np.any(np.diff(wminus.ln_f) >= 0):
        return False, "minus branch not strictly decreasing"
    dlt = 0.02
    for rho, want in ((1e-4, -1.0), (1e4, 1.0)):
        pair = analysis.weight_function("plus", params, 1.0, 1.0,
                                        [rho * math.exp(-dlt), rho * math.exp(dlt)])
        slope = (pair.ln_f[1] - pair.ln_f[0]) / (2 * dlt)
        if abs(slope - want) > 0.05:
            return False, f"plus-branch slope {slope:.3f} at rho={rho}, want {want}"
    # interior minimum of f_plus where a^2 r^(2a+1) + k2 a r^(a+1) = D
    lo, hi = 1e-3, 1e3
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if analysis.psi_branches(mid, params)[0] < 0:
            lo = mid
        else:
            hi = mid
    r1 = math.sqrt(lo * hi)
    if abs(r1 ** 3 + r1 ** 2 - 1.0) > 1e-6:
        return False, f"f+ minimum at {r1}, should solve r^3 + r^2 = 1"
    return True, f"anchor, monotonicity, slopes, minimum at rho1={r1:.6f}"


def check_gtilde_structure():
    params = analysis.PMBranchParams(a=1.0, kappa2=1.0, d=1.0)
    # implicit derivative against central differences of the branches
    for rho in (0.3, 1.0, 3.0):
        dpp, dpm = analysis.psi_prime_branches(rho, params)
        eps = 1e-6 * rho
        pp1, pm1, _ = analysis.psi_branches(rho + eps, params)
        pp0, pm0, _ = analysis.psi_branches(rho - eps, params)
        if abs(dpp - (pp1 - pp0) / (2 * eps)) > 1e-6 or abs(dpm - (pm1 - pm0) / (2 * eps)) > 1e-6:
            return False, f"Psi' finite-difference mismatch at rho={rho}"
    if not analysis.gtilde_pm("plus", 1e-4, params) < 0:
        return False, "Gt_plus not negative at rho=1e-4"
    if not analysis.gtilde_pm("plus", 1e4, params) > 0:
        return False, "Gt_plus not positive at rho=1e4"
    for a_ in (0.5, 1.0, 2.0):
        p = analysis.PMBranchParams(a=a_, kappa2=1.0, d=1.0)
        if not (analysis.gtilde_pm("minus", 1e-6, p) > 0 and analysis.gtilde_pm("minus", 1e6, p) > 0):
            return False, f"Gt_minus not positive at the ends for a={a_}"
    thr = analysis.find_thresholds(params)
    if not (analysis.gtilde_pm("plus", 2 * thr.rho_bar, params) > 0
            and analysis.gtilde_pm("plus", thr.rho_under / 2, params) < 0):
        return False, "threshold sign structure wrong"
    if not thr.g_minus_positive:
        return False, "Gt_minus scan reported a non-positive value"
    return True, f"thresholds at [{thr.rho_under:.6f}, {thr.rho_bar:.6f}], signs correct"


def check_entropy_and_envelopes():
    exps = analysis.gamma_exponents(1.0, 1.0, 1.0)
    model = _models()[0]
    grid = PeriodicGrid(dim=1, n=64, length=2 * math.pi)
    (x,) = grid.meshgrid()
    state = solver.SimState.from_primitive(
        model, ScalarField(grid, 1.0 + 0.2 * np.sin(x)), ScalarField(grid, 1.0 + 0.2 * np.cos(x)))
    cfg = solver.SolverConfig(t_end=0.2, dt_safety=0.5, stride=20)
    dt0 = solver.stable_dt(model, state, dt_safety=cfg.dt_safety)
    tol = 50.0 * (dt0 + grid.h ** 2) * cfg.t_end
    monitor = diagnostics.DiagnosticsMonitor(model, exps, tolerance=tol)
    recs = []
    final, status = solver.run(model, state, cfg, observer=lambda s: recs.append(monitor.record(s)))
    if status != solver.COMPLETED:
        return False, f"run aborted: {status}"
    if any(r.entropy_min < -1e-14 for r in recs):
        return False, "entropy production went negative"
    bad = [f for r in recs for f in r.flags]
    if bad:
        return False, f"envelope flags raised: {sorted(set(bad))}"
    if min(r.min_theta for r in recs) <= 0:
        return False, "theta lost positivity"
    cap = (recs[0].aux_plus_sup / recs[0].aux_minus_inf) ** (1.0 / (exps.gamma_plus - exps.gamma_minus))
    if max(r.max_rho for r in recs) > cap * 1.01:
        return False, "density exceeded the unconditional bound"
    return True, f"entropy >= 0, envelopes within tol, rho <= {cap:.3f}"


_CHECK_CONFIG = """
[model]
kind = ideal-gas
kappa1 = 1.0
kappa2 = 1.0
dtilde = 1.0

[grid]
n = 32

[initial]
rho0 = 1.0
theta0 = 1.0

[solver]
t_end = 0.01

[output]
directory = {out}
stride = 5
"""


def check_cli_determinism():
    import contextlib
    import io

    from .cli import main as cli_main
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        outputs = []
        for sub in ("a", "b"):
            cfg_path = tmp / f"run_{sub}.cfg"
            cfg_path.write_text(_CHECK_CONFIG.format(out=tmp / sub))
            with contextlib.redirect_stdout(io.StringIO()):
                code = cli_main(["run", str(cfg_path)])
            if code != 0:
                return False, "run exited non-zero"
            outputs.append((tmp / sub / "diagnostics.csv").read_bytes())
        if outputs[0] != outputs[1]:
            return False, "identical configs produced different CSV bytes"
        cfg = parse_config((tmp / "run_a.cfg").read_text())
        if serialize(parse_config(serialize(cfg))) != serialize(cfg):
            return False, "config round-trip not stable"
    return True, "byte-identical reruns; config round-trip stable"


CHECKS = [
    ("thermo-identities", check_thermo_identities),
    ("grid-conservation-adjointness", check_grid_conservation_adjointness),
    ("operator-convergence", check_operator_convergence),
    ("conservation-stationarity", check_conservation_and_stationarity),
    ("self-convergence", check_self_convergence),
    ("equilibration", check_equilibration),
    ("exponent-algebra", check_exponent_algebra),
    ("branch-algebra", check_branch_algebra),
    ("weight-structure", check_weight_structure),
    ("gtilde-structure", check_gtilde_structure),
    ("entropy-envelopes", check_entropy_and_envelopes),
    ("cli-determinism", check_cli_determinism),
]


def run_all(printer=print):
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"exception: {exc!r}"
        ok_all &= ok
        printer(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok_all
