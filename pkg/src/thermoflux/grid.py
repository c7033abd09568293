"""Uniform periodic lattice in 1D/2D and its second-order difference operators.

Fields live on the nodes of a torus with n nodes per axis and extent L per
axis (spacing h = L/n).  2D values are stored row major, axis 0 first.
"""
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, GridShapeError, NonFiniteError


@dataclass(frozen=True)
class PeriodicGrid:
    dim: int
    n: int        # nodes per axis
    length: float  # domain extent per axis

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 8:
            raise ConfigError(f"n must be >= 8, got {self.n}")
        if not self.length > 0:
            raise ConfigError(f"length must be > 0, got {self.length}")

    @property
    def h(self):
        return self.length / self.n

    @property
    def nnodes(self):
        return self.n ** self.dim

    @property
    def shape(self):
        return (self.n,) * self.dim

    def axes(self):
        """Node coordinates per axis (cell origins: x_i = i*h)."""
        x = np.arange(self.n) * self.h
        return (x,) * self.dim

    def meshgrid(self):
        if self.dim == 1:
            return (self.axes()[0],)
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")


@dataclass
class ScalarField:
    grid: PeriodicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise GridShapeError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("field contains non-finite values")
        self.values = v

    @classmethod
    def full(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))


def _check_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridShapeError("fields live on different grids")
    return g


def laplacian(f: ScalarField) -> ScalarField:
    """Second-order central Laplacian with periodic wraparound."""
    g = f.grid
    if g.dim == 1:
        out = kernels.lap1(f.values, g.h)
    else:
        out = kernels.lap2(f.values, g.h)
    return ScalarField(g, out)


def div_a_grad_b(a: ScalarField, b: ScalarField) -> ScalarField:
    """Conservative flux form of div(a grad b).

    Face coefficient is the arithmetic average of the two adjacent nodes, so
    the operator reduces exactly to laplacian(b) for a == 1 and conserves
    the discrete torus integral identically.
    """
    g = _check_same_grid(a, b)
    if g.dim == 1:
        out = kernels.dagb1(a.values, b.values, g.h)
    else:
        out = kernels.dagb2(a.values, b.values, g.h)
    return ScalarField(g, out)


def gradient(f: ScalarField):
    """Central-difference gradient; returns one ScalarField per axis."""
    g = f.grid
    if g.dim == 1:
        return (ScalarField(g, kernels.grad1(f.values, g.h)),)
    gx, gy = kernels.grad2(f.values, g.h)
    return (ScalarField(g, gx), ScalarField(g, gy))


def total(f: ScalarField) -> float:
    """Discrete torus integral: h^dim * sum of node values.

    NumPy pairwise summation in both backends keeps the reduction order
    fixed, so repeated evaluation is bitwise deterministic.
    """
    return f.grid.h ** f.grid.dim * float(np.sum(f.values))


# --- snapshot files -------------------------------------------------------
#
# Data file: raw little-endian float64, row major.  Sidecar (same basename,
# .meta suffix): text lines "key = value" for dim, n, L, time, field.

def snapshot_paths(path_base):
    return str(path_base) + ".f64", str(path_base) + ".meta"


def write_snapshot(path_base, f: ScalarField, name: str, time: float):
    data_path, meta_path = snapshot_paths(path_base)
    f.values.astype("<f8").tofile(data_path)
    g = f.grid
    with open(meta_path, "w") as fh:
        fh.write(f"dim = {g.dim}\n")
        fh.write(f"n = {g.n}\n")
        fh.write(f"L = {g.length!r}\n")
        fh.write(f"time = {time!r}\n")
        fh.write(f"field = {name}\n")
    return data_path, meta_path


def read_snapshot(path_base):
    data_path, meta_path = snapshot_paths(path_base)
    meta = {}
    with open(meta_path) as fh:
        for line in fh:
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    dim = int(meta["dim"])
    n = int(meta["n"])
    grid = PeriodicGrid(dim=dim, n=n, length=float(meta["L"]))
    values = np.fromfile(data_path, dtype="<f8").reshape(grid.shape)
    return ScalarField(grid, values), meta["field"], float(meta["time"])
