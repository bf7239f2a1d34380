"""Independent reference values used by the tests.

Nothing here imports the package: every oracle is either brute force or a
closed form worked out by hand for a scalar exponential.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_force_sv(increments, q, p) -> float:
    """``max q(sum_i D_i x_i)`` over all extreme points ``x_{i,n} = +-1/p_n``.

    ``increments`` has shape ``(cells, N)`` (diagonal operators) or
    ``(cells, N, N)`` (matrices).  Exponential in ``cells * N``; keep it tiny.
    """
    D = np.asarray(increments, dtype=float)
    if D.ndim == 2:
        D = np.stack([np.diag(row) for row in D])
    n, N, _ = D.shape
    q = np.asarray(q, dtype=float)
    inv_p = 1.0 / np.asarray(p, dtype=float)
    best = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=n * N):
        xs = np.asarray(signs).reshape(n, N) * inv_p
        total = sum(D[i] @ xs[i] for i in range(n))
        best = max(best, float(np.max(q * np.abs(total))))
    return best


def exp_increments(m, points, t_end=None) -> np.ndarray:
    """Increments of ``s -> e^{m s}`` (or ``e^{m (t_end - s)}``) on ``points``."""
    m = np.asarray(m)
    pts = np.asarray(points, dtype=float)
    times = pts if t_end is None else t_end - pts
    vals = np.exp(np.multiply.outer(times, m))
    return np.diff(vals, axis=0)


def conv_const(m: float, t: float) -> float:
    """``int_0^t e^{m (t-s)} ds``."""
    return t if m == 0 else (math.exp(m * t) - 1.0) / m


def conv_ramp(m: float, t: float) -> float:
    """``int_0^t e^{m (t-s)} s ds`` for ``m != 0``."""
    return (math.exp(m * t) - 1.0 - m * t) / m**2


def conv_sin(m: float, w: float, t: float) -> float:
    """``int_0^t e^{m (t-s)} sin(w s) ds``."""
    return (w * math.exp(m * t) - w * math.cos(w * t) - m * math.sin(w * t)) / (m**2 + w**2)


def rotation_chord_sum(n: int, theta: float, r: float, cells: int) -> float:
    """``sum_i |e^{i n theta d_i} - e^{i n theta d_{i-1}}|`` on a uniform partition."""
    return cells * 2.0 * abs(math.sin(n * theta * r / (2.0 * cells)))


def psi_bound(k: int, r: float) -> float:
    """``(1/k)(1 - e^{-k r})`` for ``m_k = -k``."""
    return (1.0 - math.exp(-k * r)) / k
