"""Riemann and Riemann-Stieltjes integration of vector-valued functions.

Every quadrature here works piecewise: ``[a, b]`` is split at the breakpoints
of the integrand (kinks of piecewise-linear data) and each smooth piece is
refined dyadically until successive estimates agree to ``tol`` in every
seminorm of the supplied family.  Sums are reduced with :func:`tree_sum`, a
fixed pairwise order, so results do not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .lcs_core import DimensionError, SeminormFamily
from .operators import BoundedOp
from .semigroups import Semigroup

START_CELLS = 8
BUDGET = 2**20
RICHARDSON_DEPTH = 4


class ConvergenceError(RuntimeError):
    """Dyadic refinement hit its cell budget before meeting the tolerance."""

    def __init__(self, message: str, estimates: Sequence[np.ndarray] = ()):
        super().__init__(message)
        self.estimates = list(estimates)


class MissingCertificateError(ValueError):
    """A Stieltjes integral was requested without a semivariation bound."""


def tree_sum(a) -> np.ndarray:
    """Sum along axis 0 in a fixed pairwise order."""
    a = np.asarray(a)
    if a.shape[0] == 0:
        return np.zeros(a.shape[1:], dtype=a.dtype)
    while a.shape[0] > 1:
        n = a.shape[0]
        half = n // 2
        s = a[0:2 * half:2] + a[1:2 * half:2]
        a = np.concatenate([s, a[2 * half:]]) if n % 2 else s
    return a[0]


def _norm(v, family: SeminormFamily | None) -> float:
    if family is None:
        return float(np.max(np.abs(v))) if np.size(v) else 0.0
    return float(np.max(family.evaluate(v)))


# ---------------------------------------------------------------------------
# functions of time

@dataclass(frozen=True)
class GridFunction:
    """A continuous map ``[a, b] -> K^N`` with vectorised evaluation.

    ``fn`` takes a 1-D array of times and returns an array of shape
    ``(len(times), dim)``.  ``breakpoints`` lists where the function may fail to
    be smooth; quadrature never straddles them.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    a: float
    b: float
    dim: int
    breakpoints: tuple[float, ...] = ()
    label: str = "f"
    spec: dict | None = None
    derivative: "GridFunction | None" = field(default=None, repr=False)

    def __post_init__(self):
        if not self.b >= self.a:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")

    def values(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.asarray(self.fn(ts))
        if out.shape != (ts.size, self.dim):
            raise DimensionError(self.dim, out.shape[-1] if out.ndim else 0, what=self.label)
        return out

    def __call__(self, t: float) -> np.ndarray:
        return self.values([t])[0]

    def inner_breakpoints(self, a: float, b: float) -> list[float]:
        return sorted({float(c) for c in self.breakpoints if a < c < b})

    def sup_seminorm(self, weights=None, samples: int = 2049) -> float:
        """``sup_s p(f(s))`` on a uniform grid plus all breakpoints.

        Exact for piecewise-linear data with the weighted-sup seminorms used here.
        """
        ts = np.union1d(np.linspace(self.a, self.b, samples), self.breakpoints)
        vals = np.abs(self.values(ts))
        if weights is not None:
            vals = vals * np.asarray(weights, dtype=float)
        return float(np.max(vals))

    def mapped(self, op: BoundedOp) -> "GridFunction":
        """``s -> B f(s)``."""
        deriv = self.derivative.mapped(op) if self.derivative is not None else None
        spec = None if self.spec is None else {"kind": "mapped", "inner": self.spec, "op": op.kind}
        return GridFunction(lambda ts: op.apply_many(self.values(ts)), self.a, self.b, op.dim,
                            self.breakpoints, f"B({self.label})", spec, deriv)

    def restrict(self, a: float, b: float) -> "GridFunction":
        if a < self.a - 1e-15 or b > self.b + 1e-15:
            raise ValueError("restriction must lie inside the original interval")
        return GridFunction(self.fn, a, b, self.dim, tuple(self.inner_breakpoints(a, b)),
                            self.label, self.spec, self.derivative)


def profile(phi, dphi, vector, a: float, b: float, label: str, spec: dict | None = None,
            breakpoints: tuple = ()) -> GridFunction:
    """``f(s) = phi(s) * vector`` with derivative ``phi'(s) * vector`` when given."""
    v = np.asarray(vector)
    deriv = None
    if dphi is not None:
        deriv = GridFunction(lambda ts: np.multiply.outer(dphi(ts), v), a, b, v.size, breakpoints,
                             f"{label}'")
    return GridFunction(lambda ts: np.multiply.outer(phi(ts), v), a, b, v.size, breakpoints,
                        label, spec, deriv)


def _vec_spec(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return [[float(z.real), float(z.imag)] for z in v]
    return [float(z) for z in v]


def constant(vector, a: float, b: float) -> GridFunction:
    return profile(lambda ts: np.ones_like(ts), lambda ts: np.zeros_like(ts), vector, a, b,
                   "const", {"kind": "constant", "vector": _vec_spec(vector)})


def zero(dim: int, a: float, b: float) -> GridFunction:
    return constant(np.zeros(dim), a, b)


def ramp(vector, a: float, b: float) -> GridFunction:
    """``f(s) = (s - a)/(b - a) * vector``."""
    L = b - a
    return profile(lambda ts: (ts - a) / L, lambda ts: np.full_like(ts, 1.0 / L), vector, a, b,
                   "ramp", {"kind": "ramp", "vector": _vec_spec(vector)})


def sinusoid(k: int, vector, a: float, b: float) -> GridFunction:
    """``f(s) = sin(pi k (s - a)/(b - a)) * vector``."""
    w = np.pi * k / (b - a)
    return profile(lambda ts: np.sin(w * (ts - a)), lambda ts: w * np.cos(w * (ts - a)), vector,
                   a, b, f"sin{k}", {"kind": "sin", "k": k, "vector": _vec_spec(vector)})


def piecewise_linear(knots, values, label: str = "pl") -> GridFunction:
    knots = np.asarray(knots, dtype=float)
    vals = np.asarray(values)
    if knots.ndim != 1 or knots.size < 2 or np.any(np.diff(knots) <= 0):
        raise ValueError("knots must be strictly increasing with at least two entries")
    if vals.shape[0] != knots.size:
        raise ValueError("one value vector per knot")

    def fn(ts):
        idx = np.clip(np.searchsorted(knots, ts, side="right") - 1, 0, knots.size - 2)
        w = ((ts - knots[idx]) / (knots[idx + 1] - knots[idx]))[:, None]
        return vals[idx] * (1.0 - w) + vals[idx + 1] * w

    spec = {"kind": "piecewise_linear", "knots": knots.tolist(),
            "values": [_vec_spec(v) for v in vals]}
    return GridFunction(fn, float(knots[0]), float(knots[-1]), vals.shape[1],
                        tuple(knots[1:-1].tolist()), label, spec)


def from_callable(fn, dim: int, a: float, b: float, label: str = "f",
                  vectorized: bool = False) -> GridFunction:
    if vectorized:
        return GridFunction(fn, a, b, dim, (), label)
    return GridFunction(lambda ts: np.array([np.asarray(fn(t)) for t in ts]).reshape(len(ts), dim),
                        a, b, dim, (), label)


def from_spec(spec: dict, dim: int, a: float, b: float) -> GridFunction:
    """Build a function from its JSON description (see README for the schema)."""

    def vec(key="vector"):
        raw = spec.get(key)
        if raw is None:
            return np.ones(dim)
        arr = np.asarray(raw, dtype=float)
        if arr.ndim == 2:
            arr = arr[:, 0] + 1j * arr[:, 1]
        if arr.shape != (dim,):
            raise DimensionError(dim, arr.size, what="forcing vector")
        return arr

    kind = spec.get("kind")
    if kind == "zero":
        return zero(dim, a, b)
    if kind == "constant":
        return constant(vec(), a, b)
    if kind == "ramp":
        return ramp(vec(), a, b)
    if kind == "sin":
        return sinusoid(int(spec["k"]), vec(), a, b)
    if kind == "piecewise_linear":
        vals = np.asarray(spec["values"], dtype=float)
        if vals.ndim == 3:
            vals = vals[..., 0] + 1j * vals[..., 1]
        return piecewise_linear(spec["knots"], vals)
    raise ValueError(f"unknown forcing kind {kind!r}")


# ---------------------------------------------------------------------------
# partitions and operator paths

@dataclass(frozen=True)
class Partition:
    points: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("a partition needs at least two points")
        if not np.all(np.isfinite(p)) or np.any(np.diff(p) <= 0):
            raise ValueError("partition points must be finite and strictly increasing")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> "Partition":
        return cls(np.linspace(a, b, n + 1))

    dyadic = uniform

    @classmethod
    def random(cls, a: float, b: float, n: int, rng: np.random.Generator) -> "Partition":
        inner = np.sort(rng.uniform(a, b, n - 1))
        return cls(np.concatenate([[a], inner, [b]]))

    @property
    def a(self) -> float:
        return float(self.points[0])

    @property
    def b(self) -> float:
        return float(self.points[-1])

    @property
    def n(self) -> int:
        return self.points.size - 1

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.points)))

    def refine(self) -> "Partition":
        mids = 0.5 * (self.points[:-1] + self.points[1:])
        return Partition(np.sort(np.concatenate([self.points, mids])))

    def left_tags(self) -> np.ndarray:
        return self.points[:-1]

    def mid_tags(self) -> np.ndarray:
        return 0.5 * (self.points[:-1] + self.points[1:])


@dataclass(frozen=True)
class OperatorPath:
    """An operator-valued map ``s -> alpha(s)`` on ``[a, b]``.

    * ``forward``:  ``alpha(s) = L T(s) R``
    * ``reversed``: ``alpha(s) = L T(t - s) R`` on ``[0, t]``
    * ``table``:    linear interpolation between operators given at knots

    ``L``/``R`` are optional bounded operators composed on the left/right.
    """

    kind: Literal["forward", "reversed", "table"]
    a: float
    b: float
    semigroup: Semigroup | None = None
    t: float | None = None
    right: BoundedOp | None = None
    left: BoundedOp | None = None
    knots: np.ndarray | None = None
    table: np.ndarray | None = None

    @classmethod
    def forward(cls, T: Semigroup, a: float, b: float, B: BoundedOp | None = None) -> "OperatorPath":
        if a < 0:
            raise ValueError("the forward path is defined on [0, inf)")
        return cls("forward", float(a), float(b), T, right=B)

    @classmethod
    def reversed(cls, T: Semigroup, t: float, B: BoundedOp | None = None) -> "OperatorPath":
        if t < 0:
            raise ValueError("t must be non-negative")
        return cls("reversed", 0.0, float(t), T, t=float(t), right=B)

    @classmethod
    def from_table(cls, knots, operators) -> "OperatorPath":
        knots = np.asarray(knots, dtype=float)
        ops = np.asarray(operators)
        if knots.ndim != 1 or knots.size < 2 or np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if ops.shape[0] != knots.size or ops.ndim not in (2, 3):
            raise ValueError("one operator (diagonal vector or matrix) per knot")
        return cls("table", float(knots[0]), float(knots[-1]), knots=knots, table=ops)

    @property
    def dim(self) -> int:
        if self.kind == "table":
            return self.table.shape[1]
        return self.semigroup.dim

    @property
    def is_diagonal(self) -> bool:
        if self.kind == "table":
            return self.table.ndim == 2
        ops_diag = all(op is None or op.is_diagonal for op in (self.left, self.right))
        return self.semigroup.is_diagonal and ops_diag

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.at(np.array([self.a])))

    def kinks(self) -> tuple[float, ...]:
        if self.kind == "table":
            return tuple(self.knots[1:-1].tolist())
        return ()

    def restrict(self, a: float, b: float) -> "OperatorPath":
        if a < self.a - 1e-15 or b > self.b + 1e-15 or b < a:
            raise ValueError(f"[{a}, {b}] is not inside [{self.a}, {self.b}]")
        return OperatorPath(self.kind, float(a), float(b), self.semigroup, self.t, self.right,
                            self.left, self.knots, self.table)

    def compose_right(self, B: BoundedOp) -> "OperatorPath":
        if self.kind == "table":
            return OperatorPath.from_table(self.knots, _table_compose(self.table, B, right=True))
        R = B if self.right is None else _compose(self.right, B)
        return OperatorPath(self.kind, self.a, self.b, self.semigroup, self.t, R, self.left)

    def compose_left(self, B: BoundedOp) -> "OperatorPath":
        if self.kind == "table":
            return OperatorPath.from_table(self.knots, _table_compose(self.table, B, right=False))
        L = B if self.left is None else _compose(B, self.left)
        return OperatorPath(self.kind, self.a, self.b, self.semigroup, self.t, self.right, L)

    def _times(self, s: np.ndarray) -> np.ndarray:
        if self.kind == "forward":
            return s
        tt = self.t - s
        return np.where(np.abs(tt) < 1e-14 * max(1.0, abs(self.t)), 0.0, tt)

    def at(self, s) -> np.ndarray:
        """Diagonal coefficients ``(K, N)`` or matrices ``(K, N, N)`` at the times ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.kind == "table":
            idx = np.clip(np.searchsorted(self.knots, s, side="right") - 1, 0, self.knots.size - 2)
            w = (s - self.knots[idx]) / (self.knots[idx + 1] - self.knots[idx])
            w = w.reshape((-1,) + (1,) * (self.table.ndim - 1))
            return self.table[idx] * (1.0 - w) + self.table[idx + 1] * w
        times = self._times(s)
        if np.any(times < 0):
            raise ValueError("operator path evaluated outside its interval")
        if self.is_diagonal:
            coef = self.semigroup.diag(times)
            for op in (self.left, self.right):
                if op is not None:
                    coef = coef * op.diag()
            return coef
        mats = np.stack([self.semigroup.matrix(float(t)) for t in times])
        if self.right is not None:
            mats = mats @ self.right.matrix()
        if self.left is not None:
            mats = self.left.matrix() @ mats
        return mats

    def apply(self, s, xs) -> np.ndarray:
        ops = self.at(s)
        if ops.ndim == 2:
            return ops * xs
        return np.einsum("kij,kj->ki", ops, xs)

    def truncate(self, dim: int) -> "OperatorPath | None":
        """Same path on a smaller truncation, when the symbol can be re-truncated."""
        T = self.semigroup
        if self.kind == "table" or T is None or not T.is_diagonal or T.generator.kind == "list":
            return None
        ops = []
        for op in (self.left, self.right):
            if op is None or op.kind in ("identity", "zero"):
                ops.append(None if op is None else BoundedOp(op.kind, dim, codomain=op.codomain))
            elif op.kind == "diagonal":
                ops.append(BoundedOp.diagonal(op.data[:dim], op.codomain))
            else:
                return None
        T2 = Semigroup(T.generator.truncate(dim))
        return OperatorPath(self.kind, self.a, self.b, T2, self.t, ops[1], ops[0])


def _compose(outer: BoundedOp, inner: BoundedOp) -> BoundedOp:
    if outer.is_diagonal and inner.is_diagonal:
        return BoundedOp.diagonal(outer.diag() * inner.diag(), outer.codomain)
    return BoundedOp.dense(outer.matrix() @ inner.matrix(), outer.codomain)


def _table_compose(table: np.ndarray, B: BoundedOp, right: bool) -> np.ndarray:
    if table.ndim == 2 and B.is_diagonal:
        return table * B.diag()
    mats = table if table.ndim == 3 else np.stack([np.diag(row) for row in table])
    return mats @ B.matrix() if right else B.matrix() @ mats


# ---------------------------------------------------------------------------
# Riemann integration

@dataclass
class QuadratureInfo:
    cells: int
    pieces: int
    last_change: float


def _pieces(a: float, b: float, cuts: Sequence[float]) -> list[tuple[float, float]]:
    pts = [a] + sorted({c for c in cuts if a < c < b}) + [b]
    return list(zip(pts[:-1], pts[1:]))


def _simpson_piece(g, u: float, v: float, tol: float, family, budget: int):
    n = START_CELLS
    nodes = np.linspace(u, v, n + 1)
    vals = g(nodes)
    prev = None
    agreed = 0
    while True:
        h = (v - u) / n
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        est = tree_sum(vals * w[:, None]) * (h / 3.0)
        if prev is not None:
            change = _norm(est - prev, family)
            # two agreements in a row, so that samples aliased onto zeros do not stop the ladder
            agreed = agreed + 1 if change < tol else 0
            if agreed == 2:
                return est, n, change
        if 2 * n > budget:
            raise ConvergenceError(
                f"Simpson refinement on [{u}, {v}] exhausted {budget} cells", [prev, est])
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        new = g(mids)
        merged = np.empty((2 * n + 1,) + vals.shape[1:], dtype=np.result_type(vals, new))
        merged[0::2] = vals
        merged[1::2] = new
        nodes = np.linspace(u, v, 2 * n + 1)
        vals = merged
        prev = est
        n *= 2


def riemann_integral(f: GridFunction, a: float, b: float, tol: float = 1e-8,
                     family: SeminormFamily | None = None, budget: int = BUDGET,
                     full_output: bool = False):
    """Composite Simpson integral of ``f`` over ``[a, b]`` with dyadic refinement.

    ``family=None`` measures convergence in the sup norm.
    """
    if b < a:
        raise ValueError("need a <= b")
    if b == a:
        out = np.zeros(f.dim, dtype=np.result_type(f.values([a]), float))
        return (out, QuadratureInfo(0, 0, 0.0)) if full_output else out
    pieces = _pieces(a, b, f.breakpoints)
    total = 0
    worst = 0.0
    parts = []
    for u, v in pieces:
        est, cells, change = _simpson_piece(f.values, u, v, tol * (v - u) / (b - a), family, budget)
        parts.append(est)
        total += cells
        worst = max(worst, change)
    out = tree_sum(np.array(parts))
    return (out, QuadratureInfo(total, len(pieces), worst)) if full_output else out


def _convolution_integrand(T: Semigroup, f: GridFunction, t: float) -> GridFunction:
    return GridFunction(lambda ss: T.apply_many(t - ss, f.values(ss)), 0.0, t, f.dim,
                        tuple(f.inner_breakpoints(0.0, t)), f"T*{f.label}")


def convolve(T: Semigroup, f: GridFunction, t: float, tol: float = 1e-8,
             family: SeminormFamily | None = None, budget: int = BUDGET) -> np.ndarray:
    """``(T*f)(t) = int_0^t T(t - s) f(s) ds``."""
    if t < 0 or t > f.b + 1e-12 or f.a > 0:
        raise ValueError(f"t={t} must lie in [0, {f.b}] and f must start at 0")
    if T.dim != f.dim:
        raise DimensionError(T.dim, f.dim, what="forcing")
    return riemann_integral(_convolution_integrand(T, f, t), 0.0, t, tol, family, budget)


def local_convolutions(T: Semigroup, f: GridFunction, nodes, tol: float = 1e-10,
                       family: SeminormFamily | None = None, budget: int = 2**14) -> np.ndarray:
    """``int_{nodes[k]}^{nodes[k+1]} T(nodes[k+1] - s) f(s) ds`` for every cell at once.

    Composite Simpson sums on ``M`` sub-cells are combined with one Richardson
    step (Boole's rule), refined until every cell changes by less than its
    length share of ``tol`` twice in a row.  Cells must not contain breakpoints
    of ``f`` in their interior.
    """
    nodes = np.asarray(nodes, dtype=float)
    u, v = nodes[:-1], nodes[1:]
    L = v - u
    total = max(float(np.sum(L)), 1e-300)
    M = START_CELLS
    simpson_prev = None
    prev = None
    agreed = 0
    while True:
        j = np.arange(M + 1) / M
        ss = u[:, None] + L[:, None] * j[None, :]
        offs = (v[:, None] - ss).ravel()
        offs[offs < 0] = 0.0
        vals = T.apply_many(offs, f.values(ss.ravel())).reshape(u.size, M + 1, -1)
        w = np.ones(M + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        simpson = np.einsum("kjn,j->kn", vals, w) * (L / (3.0 * M))[:, None]
        est = simpson if simpson_prev is None else simpson + (simpson - simpson_prev) / 15.0
        if prev is not None:
            diff = np.abs(est - prev)
            if family is not None:
                diff = np.max(np.stack([diff * w_ for w_ in family.weights]), axis=0)
            # a cell is settled once its change is below its share of tol or at roundoff level
            change = np.max(diff, axis=1)
            floor = 64 * np.finfo(float).eps * np.max(np.abs(est), axis=1)
            settled = (change < tol * L / total) | (change <= floor)
            agreed = agreed + 1 if np.all(settled) else 0
            if agreed == 2:
                return est
        if 2 * M > budget:
            raise ConvergenceError(f"cellwise quadrature exhausted {budget} sub-cells", [prev, est])
        simpson_prev = simpson
        prev = est
        M *= 2


# ---------------------------------------------------------------------------
# Riemann-Stieltjes integration

def rs_sum(f: GridFunction, alpha: OperatorPath, d: Partition, tags) -> np.ndarray:
    """``sum_i (alpha(d_i) - alpha(d_{i-1})) f(c_i)``."""
    tags = np.asarray(tags, dtype=float)
    pts = d.points
    if tags.shape != (d.n,):
        raise ValueError(f"need {d.n} tags, got {tags.size}")
    bad = np.flatnonzero((tags < pts[:-1]) | (tags > pts[1:]))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"tag c_{i + 1}={tags[i]} outside [{pts[i]}, {pts[i + 1]}]")
    ops = alpha.at(pts)
    delta = ops[1:] - ops[:-1]
    F = f.values(tags)
    terms = delta * F if delta.ndim == 2 else np.einsum("kij,kj->ki", delta, F)
    return tree_sum(terms)


@dataclass
class RSInfo:
    cells: int
    pieces: int
    tag_gap: float
    last_change: float
    bound: float
    bound_ok: bool


def _richardson(table: list[list[np.ndarray]], new: np.ndarray, base: float) -> list[np.ndarray]:
    row = [new]
    prev = table[-1] if table else []
    for j in range(1, min(len(prev) + 1, RICHARDSON_DEPTH + 1)):
        fac = base**j - 1.0
        row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / fac)
    table.append(row)
    return row


def _rs_piece(f: GridFunction, alpha: OperatorPath, u: float, v: float, tol: float, family,
              budget: int):
    left_tab: list = []
    mid_tab: list = []
    n = START_CELLS
    prev_best = None
    while True:
        d = Partition.uniform(u, v, n)
        L = rs_sum(f, alpha, d, d.left_tags())
        M = rs_sum(f, alpha, d, d.mid_tags())
        lbest = _richardson(left_tab, L, 2.0)[-1]
        mbest = _richardson(mid_tab, M, 4.0)[-1]
        gap = _norm(lbest - mbest, family)
        if prev_best is not None:
            change = _norm(lbest - prev_best, family)
            if change < tol and gap < tol:
                return lbest, n, gap, change
        if 2 * n > budget:
            raise ConvergenceError(
                f"Stieltjes refinement on [{u}, {v}] exhausted {budget} cells", [prev_best, lbest])
        prev_best = lbest
        n *= 2


def rs_integral(f: GridFunction, alpha: OperatorPath, a: float, b: float, tol: float = 1e-8,
                sv=None, family: SeminormFamily | None = None, budget: int = BUDGET,
                full_output: bool = False):
    """``int_a^b f(s) d alpha(s)`` as the limit of tagged partition sums.

    Left-tag sums on a dyadic ladder are Richardson-extrapolated; the ladder
    stops once successive extrapolants and the left/midpoint tag families agree
    to ``tol``.  ``sv`` is the semivariation certificate (anything with
    ``.value`` and optionally ``.q``/``.p`` weights) required for the integral
    to exist; the result is checked against ``q(I) <= SV * sup p(f)``.
    """
    if sv is None:
        raise MissingCertificateError("a semivariation certificate is required")
    if b < a:
        raise ValueError("need a <= b")
    if b == a:
        out = np.zeros(alpha.dim, dtype=complex if not alpha.is_real else float)
        info = RSInfo(0, 0, 0.0, 0.0, 0.0, True)
        return (out, info) if full_output else out
    cuts = list(f.breakpoints) + list(alpha.kinks())
    pieces = _pieces(a, b, cuts)
    parts, cells, gap, change = [], 0, 0.0, 0.0
    for u, v in pieces:
        est, n, g, c = _rs_piece(f, alpha, u, v, tol * (v - u) / (b - a), family, budget)
        parts.append(est)
        cells += n
        gap = max(gap, g)
        change = max(change, c)
    out = tree_sum(np.array(parts))
    sv_value = float(getattr(sv, "value", sv))
    q = getattr(sv, "q", None)
    p = getattr(sv, "p", None)
    q_val = _norm(out, None) if q is None else float(np.max(np.asarray(q) * np.abs(out)))
    bound = sv_value * f.restrict(a, b).sup_seminorm(p)
    info = RSInfo(cells, len(pieces), gap, change, bound, q_val <= bound + 10 * tol)
    return (out, info) if full_output else out
