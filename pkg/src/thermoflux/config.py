"""Run configuration: a strict sectioned key-value format.

Example document (defaults shown where a key is optional):

    [model]
    kind = ideal-gas            # ideal-gas | porous-media | generalized-pm
    kappa1 = 1.0
    kappa2 = 1.0
    # alpha = 2.0               # porous-media / generalized-pm
    # beta = 2.0                # generalized-pm
    conductivity = ideal-gas-law  # ideal-gas-law | pm-law | constant
    dtilde = 1.0                # value for the chosen conductivity law

    [grid]
    dim = 1
    n = 128
    length = 6.283185307179586

    [initial]
    rho0 = 1.0
    theta0 = 1.0
    rho_amplitude = 0.1         # rho = rho0*(1 + amp*sin(2*pi*m*x/L))
    rho_mode = 1
    theta_amplitude = 0.1       # theta = theta0*(1 + amp*cos(2*pi*m*x/L))
    theta_mode = 1
    noise = 0.0                 # uniform random perturbation amplitude
    seed = 0

    [solver]
    t_end = 0.1
    dt_safety = 0.5
    integrator = rk2            # rk2 | euler
    abort_on_nonpositive_theta = true

    [output]
    directory = out
    stride = 10
    snapshots = false

Unknown sections or keys are errors; every diagnostic carries the section,
key and line number.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import PeriodicGrid, ScalarField
from .solver import SimState, SolverConfig
from .thermo import (COND_CONSTANT, COND_IDEAL_GAS_LAW, COND_PM_LAW,
                     GENERALIZED_PM, IDEAL_GAS, POROUS_MEDIA, Conductivity,
                     ModelParams)


@dataclass
class InitialConditions:
    rho0: float
    theta0: float
    rho_amplitude: float = 0.1
    rho_mode: int = 1
    theta_amplitude: float = 0.1
    theta_mode: int = 1
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.rho0 > 0 or not self.theta0 > 0:
            raise ConfigError("rho0 and theta0 must be positive")
        for name in ("rho_amplitude", "theta_amplitude"):
            if abs(getattr(self, name)) + abs(self.noise) >= 1.0:
                raise ConfigError(f"{name} plus noise must stay below 1 "
                                  "so the initial data remain positive")


@dataclass
class OutputConfig:
    directory: str = "out"
    stride: int = 10
    snapshots: bool = False


@dataclass
class RunConfig:
    model: ModelParams
    grid: PeriodicGrid
    initial: InitialConditions
    solver: SolverConfig
    output: OutputConfig


# (section, key) -> (type, required-for, default)
_COND_VALUE_KEY = {COND_IDEAL_GAS_LAW: "dtilde", COND_PM_LAW: "d", COND_CONSTANT: "k"}


def _parse_sections(text):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise ConfigError(f"line {lineno}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any section: {line!r}")
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key = key.strip()
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (value.strip(), lineno)
    return sections


class _Section:
    def __init__(self, name, data):
        self.name = name
        self.data = dict(data)

    def _raw(self, key, default=None, required=False):
        if key in self.data:
            value, _ = self.data.pop(key)
            return value
        if required:
            raise ConfigError(f"[{self.name}] missing required key {key!r}")
        return default

    def str(self, key, default=None, required=False, choices=None):
        value = self._raw(key, default, required)
        if value is not None and choices is not None and value not in choices:
            raise ConfigError(f"[{self.name}] {key} must be one of {sorted(choices)}, got {value!r}")
        return value

    def float(self, key, default=None, required=False):
        value = self._raw(key, default, required)
        if value is None or isinstance(value, float):
            return value
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} must be a number, got {value!r}") from None

    def int(self, key, default=None, required=False):
        value = self._raw(key, default, required)
        if value is None or isinstance(value, int):
            return value
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} must be an integer, got {value!r}") from None

    def bool(self, key, default=None, required=False):
        value = self._raw(key, default, required)
        if value is None or isinstance(value, bool):
            return value
        low = value.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"[{self.name}] {key} must be true or false, got {value!r}")

    def reject_unknown(self):
        if self.data:
            key, (_, lineno) = next(iter(self.data.items()))
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{self.name}]")


def parse_config(text) -> RunConfig:
    sections = _parse_sections(text)
    known = {"model", "grid", "initial", "solver", "output"}
    for name in sections:
        if name not in known:
            raise ConfigError(f"unknown section [{name}]")
    for name in ("model", "grid", "initial", "solver"):
        if name not in sections:
            raise ConfigError(f"missing required section [{name}]")

    sm = _Section("model", sections["model"])
    kind = sm.str("kind", required=True, choices={IDEAL_GAS, POROUS_MEDIA, GENERALIZED_PM})
    kappa1 = sm.float("kappa1", required=True)
    kappa2 = sm.float("kappa2", required=True)
    alpha = sm.float("alpha")
    beta = sm.float("beta")
    default_cond = COND_IDEAL_GAS_LAW if kind == IDEAL_GAS else COND_PM_LAW
    cond_kind = sm.str("conductivity", default=default_cond,
                       choices={COND_IDEAL_GAS_LAW, COND_PM_LAW, COND_CONSTANT})
    value_key = _COND_VALUE_KEY[cond_kind]
    cond_value = sm.float(value_key, default=1.0)
    # reject constants that belong to a different conductivity law
    for other in set(_COND_VALUE_KEY.values()) - {value_key}:
        if sm._raw(other) is not None:
            raise ConfigError(f"[model] key {other!r} does not apply to "
                              f"conductivity = {cond_kind}")
    sm.reject_unknown()
    try:
        conductivity = Conductivity(cond_kind, cond_value)
        model = ModelParams(kind, kappa1, kappa2, conductivity, alpha=alpha, beta_exp=beta)
    except ConfigError as exc:
        raise ConfigError(f"[model] {exc}") from None

    sg = _Section("grid", sections["grid"])
    try:
        grid = PeriodicGrid(dim=sg.int("dim", default=1), n=sg.int("n", required=True),
                            length=sg.float("length", default=2 * math.pi))
    except ConfigError as exc:
        raise ConfigError(f"[grid] {exc}") from None
    sg.reject_unknown()

    si = _Section("initial", sections["initial"])
    try:
        initial = InitialConditions(
            rho0=si.float("rho0", required=True),
            theta0=si.float("theta0", required=True),
            rho_amplitude=si.float("rho_amplitude", default=0.1),
            rho_mode=si.int("rho_mode", default=1),
            theta_amplitude=si.float("theta_amplitude", default=0.1),
            theta_mode=si.int("theta_mode", default=1),
            noise=si.float("noise", default=0.0),
            seed=si.int("seed", default=0))
    except ConfigError as exc:
        raise ConfigError(f"[initial] {exc}") from None
    si.reject_unknown()

    ss = _Section("solver", sections["solver"])
    try:
        solver = SolverConfig(
            t_end=ss.float("t_end", required=True),
            dt_safety=ss.float("dt_safety", default=0.5),
            stride=ss.int("stride", default=10),
            integrator=ss.str("integrator", default="rk2", choices={"rk2", "euler"}),
            abort_on_nonpositive_theta=ss.bool("abort_on_nonpositive_theta", default=True))
    except ConfigError as exc:
        raise ConfigError(f"[solver] {exc}") from None
    ss.reject_unknown()

    so = _Section("output", sections.get("output", {}))
    out_stride = so.int("stride", default=None)
    if out_stride is not None and out_stride < 1:
        raise ConfigError(f"[output] stride must be >= 1, got {out_stride}")
    output = OutputConfig(directory=so.str("directory", default="out"),
                          stride=out_stride if out_stride is not None else solver.stride,
                          snapshots=so.bool("snapshots", default=False))
    so.reject_unknown()
    if output.stride != solver.stride:
        solver.stride = output.stride

    return RunConfig(model=model, grid=grid, initial=initial, solver=solver, output=output)


def serialize(cfg: RunConfig) -> str:
    """Render a RunConfig back to the text format (parse(serialize(c)) == c)."""
    m, c = cfg.model, cfg.model.conductivity
    lines = ["[model]", f"kind = {m.kind}", f"kappa1 = {m.kappa1!r}", f"kappa2 = {m.kappa2!r}"]
    if m.alpha is not None:
        lines.append(f"alpha = {m.alpha!r}")
    if m.beta_exp is not None:
        lines.append(f"beta = {m.beta_exp!r}")
    lines.append(f"conductivity = {c.kind}")
    lines.append(f"{_COND_VALUE_KEY[c.kind]} = {c.value!r}")
    g = cfg.grid
    lines += ["", "[grid]", f"dim = {g.dim}", f"n = {g.n}", f"length = {g.length!r}"]
    i = cfg.initial
    lines += ["", "[initial]", f"rho0 = {i.rho0!r}", f"theta0 = {i.theta0!r}",
              f"rho_amplitude = {i.rho_amplitude!r}", f"rho_mode = {i.rho_mode}",
              f"theta_amplitude = {i.theta_amplitude!r}", f"theta_mode = {i.theta_mode}",
              f"noise = {i.noise!r}", f"seed = {i.seed}"]
    s = cfg.solver
    lines += ["", "[solver]", f"t_end = {s.t_end!r}", f"dt_safety = {s.dt_safety!r}",
              f"integrator = {s.integrator}",
              f"abort_on_nonpositive_theta = {str(s.abort_on_nonpositive_theta).lower()}"]
    o = cfg.output
    lines += ["", "[output]", f"directory = {o.directory}", f"stride = {o.stride}",
              f"snapshots = {str(o.snapshots).lower()}"]
    return "\n".join(lines) + "\n"


def build_initial_state(cfg: RunConfig) -> SimState:
    """Perturbed-uniform initial fields on the configured grid."""
    grid, ic = cfg.grid, cfg.initial
    two_pi_over_l = 2.0 * math.pi / grid.length
    if grid.dim == 1:
        (x,) = grid.meshgrid()
        rho_pert = np.sin(two_pi_over_l * ic.rho_mode * x)
        theta_pert = np.cos(two_pi_over_l * ic.theta_mode * x)
    else:
        x, y = grid.meshgrid()
        rho_pert = np.sin(two_pi_over_l * ic.rho_mode * x) * np.sin(two_pi_over_l * ic.rho_mode * y)
        theta_pert = np.cos(two_pi_over_l * ic.theta_mode * x) * np.cos(two_pi_over_l * ic.theta_mode * y)
    rho = ic.rho0 * (1.0 + ic.rho_amplitude * rho_pert)
    theta = ic.theta0 * (1.0 + ic.theta_amplitude * theta_pert)
    if ic.noise:
        rng = np.random.default_rng(ic.seed)
        rho = rho * (1.0 + ic.noise * rng.uniform(-1.0, 1.0, grid.shape))
        theta = theta * (1.0 + ic.noise * rng.uniform(-1.0, 1.0, grid.shape))
    return SimState.from_primitive(cfg.model, ScalarField(grid, rho), ScalarField(grid, theta))
