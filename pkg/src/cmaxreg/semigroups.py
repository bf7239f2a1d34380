"""Semigroup evaluation and diagnostics for the semigroup axioms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import expm

from .lcs_core import DimensionError
from .operators import DiagonalGenerator

DYADIC_PROBES = 129


class Semigroup:
    """``T(t)`` for a diagonal generator (multiplication semigroup) or a dense matrix.

    ``omega`` is the exponent in ``q(e^{-omega t} T(t) x) <= C p(x)``; for the
    multiplication kind it defaults to ``sup_n Re m_n``.
    """

    def __init__(self, generator: DiagonalGenerator | np.ndarray, omega: float | None = None):
        if isinstance(generator, DiagonalGenerator):
            self.kind: Literal["multiplication", "matrix"] = "multiplication"
            self.generator = generator
            self._m = generator.m
            default_omega = generator.sup_re
        else:
            a = np.array(generator)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError("matrix generator must be square")
            if not np.all(np.isfinite(a)):
                raise ValueError("matrix generator has non-finite entries")
            a.setflags(write=False)
            self.kind = "matrix"
            self.generator = a
            self._expm = lru_cache(maxsize=4096)(self._expm_uncached)
            default_omega = float(np.max(np.linalg.eigvals(a).real))
        if omega is not None and self.kind == "multiplication" and omega < default_omega:
            raise ValueError(f"omega={omega} is below sup Re m_n={default_omega}")
        self.omega = default_omega if omega is None else float(omega)

    def __repr__(self):
        return f"Semigroup(kind={self.kind!r}, dim={self.dim}, omega={self.omega:g})"

    @property
    def dim(self) -> int:
        return self.generator.dim if self.kind == "multiplication" else self.generator.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return self.kind == "multiplication"

    @property
    def dtype(self):
        g = self._m if self.is_diagonal else self.generator
        return np.result_type(g, float)

    def _expm_uncached(self, t: float) -> np.ndarray:
        return expm(t * self.generator)

    def diag(self, ts) -> np.ndarray:
        """``exp(m t)`` for every ``t`` in ``ts``; shape ``(len(ts), N)``."""
        if not self.is_diagonal:
            raise TypeError("matrix semigroup has no diagonal representation")
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.exp(np.multiply.outer(ts, self._m))

    def matrix(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError(f"semigroup is only defined for t >= 0, got {t}")
        if self.is_diagonal:
            return np.diag(np.exp(self._m * t))
        return self._expm(float(t))

    def apply(self, t: float, x) -> np.ndarray:
        if t < 0:
            raise ValueError(f"semigroup is only defined for t >= 0, got {t}")
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise DimensionError(self.dim, x.size)
        if self.is_diagonal:
            return np.exp(self._m * t) * x
        return self._expm(float(t)) @ x

    def apply_many(self, ts, xs) -> np.ndarray:
        """Row-wise ``T(ts[k]) xs[k]``; ``xs`` may be a single vector."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if np.any(ts < 0):
            raise ValueError("semigroup is only defined for t >= 0")
        xs = np.broadcast_to(xs, (ts.size, self.dim))
        if self.is_diagonal:
            return self.diag(ts) * xs
        out = np.empty(xs.shape, dtype=np.result_type(self.generator, xs, float))
        for k, t in enumerate(ts):
            out[k] = self._expm(float(t)) @ xs[k]
        return out


def apply_semigroup(T: Semigroup, t: float, x) -> np.ndarray:
    return T.apply(t, x)


def law_residual(T: Semigroup, t: float, s: float, x, q) -> float:
    """``q(T(t+s)x - T(t)T(s)x)``."""
    if t < 0 or s < 0:
        raise ValueError("times must be non-negative")
    lhs = T.apply(t + s, x)
    rhs = T.apply(t, T.apply(s, x))
    return float(np.max(np.asarray(q) * np.abs(lhs - rhs)))


def continuity_modulus(T: Semigroup, h: float, x, q) -> float:
    """``q((T(h) - I) x)``."""
    if h < 0:
        raise ValueError("h must be non-negative")
    x = np.asarray(x)
    return float(np.max(np.asarray(q) * np.abs(T.apply(h, x) - x)))


@dataclass(frozen=True)
class Equicontinuity:
    """Outcome of a search for ``(p, C)`` with ``q(T(t)x) <= C p(x)`` on ``[0, t0]``."""

    ok: bool
    p_index: int | None
    p: np.ndarray | None
    C: float
    exact: bool
    violation: dict | None = None


def _diag_constant(T: Semigroup, t0: float, q: np.ndarray, p: np.ndarray):
    growth = np.maximum(1.0, np.exp(np.real(T._m) * t0))
    seen = q > 0
    blind = seen & (p == 0)
    if np.any(blind):
        n = int(np.flatnonzero(blind)[0])
        return None, {"coordinate": n + 1, "reason": "q sees a coordinate that p does not"}
    ratio = np.where(seen, q / np.where(p > 0, p, 1.0), 0.0)
    return float(np.max(ratio * growth)), None


def _matrix_constant(T: Semigroup, t0: float, q: np.ndarray, p: np.ndarray):
    ts = np.linspace(0.0, t0, DYADIC_PROBES)
    best = 0.0
    for t in ts:
        M = np.abs(T.matrix(t))
        hit = (M > 0) & (p[None, :] == 0) & (q[:, None] > 0)
        if np.any(hit):
            n, k = map(int, np.argwhere(hit)[0])
            return None, {"coordinate": k + 1, "row": n + 1, "t": float(t),
                          "reason": "q sees a coordinate that p does not"}
        with np.errstate(divide="ignore", invalid="ignore"):
            rows = np.where(M > 0, M / p[None, :], 0.0).sum(axis=1)
        best = max(best, float(np.max(q * rows)))
    return best, None


def equicontinuity_constants(
    T: Semigroup, t0: float, q, candidates: Sequence
) -> Equicontinuity:
    """First candidate ``p`` with a finite constant and the smallest such ``C``.

    Exact for the multiplication kind.  For the matrix kind ``C`` is the max over
    129 equispaced (dyadic for ``t0 = 2^k``) probe times, hence a lower bound of the
    true constant.
    """
    if t0 < 0:
        raise ValueError("t0 must be non-negative")
    q = np.asarray(q, dtype=float)
    last_violation = None
    for idx, p in enumerate(candidates):
        p = np.asarray(p, dtype=float)
        if T.is_diagonal:
            C, violation = _diag_constant(T, t0, q, p)
        else:
            C, violation = _matrix_constant(T, t0, q, p)
        if C is not None:
            return Equicontinuity(True, idx, p, C, T.is_diagonal)
        last_violation = violation
    return Equicontinuity(False, None, None, float("inf"), T.is_diagonal, last_violation)
