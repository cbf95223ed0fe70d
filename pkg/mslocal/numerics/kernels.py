"""Compiled Jacobi sweeps shared by the block rotor and the dense solver.

Both kernels work in place on C-contiguous float64 arrays and rotate the
columns of V along with A. Convergence checks and sweep limits stay with
the callers.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _apply_rotation(A: np.ndarray, V: np.ndarray, p: int, q: int, c: float, s: float) -> None:
    m = A.shape[0]
    for i in range(m):
        aip = A[i, p]
        aiq = A[i, q]
        A[i, p] = c * aip - s * aiq
        A[i, q] = s * aip + c * aiq
    for i in range(m):
        api = A[p, i]
        aqi = A[q, i]
        A[p, i] = c * api - s * aqi
        A[q, i] = s * api + c * aqi
    A[p, q] = 0.0
    A[q, p] = 0.0
    for i in range(V.shape[0]):
        vip = V[i, p]
        viq = V[i, q]
        V[i, p] = c * vip - s * viq
        V[i, q] = s * vip + c * viq


@njit(cache=True)
def tangent_sweep(A: np.ndarray, V: np.ndarray) -> None:
    """One row-cyclic sweep using the small-angle tangent rotation."""
    m = A.shape[0]
    for p in range(m - 1):
        for q in range(p + 1, m):
            apq = A[p, q]
            if apq == 0.0:
                continue
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            if abs(theta) > 1e150:
                t = 1.0 / (2.0 * theta)
            else:
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            _apply_rotation(A, V, p, q, c, t * c)


@njit(cache=True)
def angle_sweep(A: np.ndarray, V: np.ndarray) -> None:
    """One row-cyclic sweep with the rotation angle taken from atan2."""
    m = A.shape[0]
    for p in range(m - 1):
        for q in range(p + 1, m):
            apq = A[p, q]
            if abs(apq) < 1e-300:
                continue
            phi = 0.5 * math.atan2(2.0 * apq, A[q, q] - A[p, p])
            _apply_rotation(A, V, p, q, math.cos(phi), math.sin(phi))
