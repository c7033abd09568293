"""NumPy implementations of the periodic stencil kernels.

These are the fallback when the compiled extension is unavailable.  The
compiled kernels evaluate the same arithmetic expressions in the same
association order, so both backends return bit-identical arrays.
"""
import numpy as np


def lap1(f, h):
    inv_h2 = 1.0 / (h * h)
    return (np.roll(f, 1) - 2.0 * f + np.roll(f, -1)) * inv_h2


def lap2(f, h):
    inv_h2 = 1.0 / (h * h)
    sx = (np.roll(f, 1, axis=0) - 2.0 * f + np.roll(f, -1, axis=0)) * inv_h2
    sy = (np.roll(f, 1, axis=1) - 2.0 * f + np.roll(f, -1, axis=1)) * inv_h2
    return sx + sy


def dagb1(a, b, h):
    # flux at face i+1/2, then discrete divergence of the faces
    inv_h = 1.0 / h
    flux = (0.5 * (a + np.roll(a, -1))) * (np.roll(b, -1) - b) * inv_h
    return (flux - np.roll(flux, 1)) * inv_h


def dagb2(a, b, h):
    inv_h = 1.0 / h
    fx = (0.5 * (a + np.roll(a, -1, axis=0))) * (np.roll(b, -1, axis=0) - b) * inv_h
    fy = (0.5 * (a + np.roll(a, -1, axis=1))) * (np.roll(b, -1, axis=1) - b) * inv_h
    dx = (fx - np.roll(fx, 1, axis=0)) * inv_h
    dy = (fy - np.roll(fy, 1, axis=1)) * inv_h
    return dx + dy


def grad1(f, h):
    inv_2h = 1.0 / (2.0 * h)
    return (np.roll(f, -1) - np.roll(f, 1)) * inv_2h


def grad2(f, h):
    inv_2h = 1.0 / (2.0 * h)
    gx = (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) * inv_2h
    gy = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) * inv_2h
    return gx, gy
