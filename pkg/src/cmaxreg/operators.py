"""Diagonal generators, bounded operators and the extrapolation space ``X_{-1}``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .lcs_core import DimensionError, SeminormFamily, as_vector

SymbolKind = Literal["constant", "linear", "list", "rotation"]
Verdict = Literal["member", "non_member", "inconclusive"]


class NotInvertibleError(ValueError):
    """``0`` is not in the resolvent set of the (truncated) generator."""

    def __init__(self, sup_re: float):
        super().__init__(f"generator is not invertible: sup Re m_n = {sup_re:.6g} is not < 0")
        self.sup_re = sup_re


@dataclass(frozen=True)
class DiagonalGenerator:
    """``A x = (m_n x_n)`` on the first ``dim`` coordinates.

    ``kind`` selects how the symbol is generated so that the same operator can be
    re-truncated at any size (needed by the growth tests in :func:`in_domain`):

    * ``constant``: ``m_n = c``
    * ``linear``: ``m_n = slope * n + offset`` (``slope=-1`` gives ``m_n = -n``)
    * ``list``: an explicit finite symbol, i.e. a bounded operator
    * ``rotation``: ``m_n = shift + i * theta * n`` (``shift < 0`` makes it invertible)
    """

    kind: SymbolKind
    dim: int
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind == "list":
            vals = np.asarray(self.params["values"])
            if vals.size != self.dim:
                raise DimensionError(self.dim, vals.size, what="symbol list")
        elif self.kind not in ("constant", "linear", "rotation"):
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        m = self.symbol()
        if not np.all(np.isfinite(m)):
            raise ValueError("symbol has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "_m", m)

    # construction helpers -------------------------------------------------
    @classmethod
    def from_list(cls, values) -> "DiagonalGenerator":
        v = np.asarray(values)
        v = v.astype(complex) if np.iscomplexobj(v) else v.astype(float)
        return cls("list", v.size, {"values": tuple(v.tolist())})

    @classmethod
    def linear(cls, dim: int, slope: float = -1.0, offset: float = 0.0) -> "DiagonalGenerator":
        return cls("linear", dim, {"slope": slope, "offset": offset})

    @classmethod
    def rotation(cls, dim: int, theta: float = 1.0, shift: float = 0.0) -> "DiagonalGenerator":
        return cls("rotation", dim, {"theta": theta, "shift": shift})

    @classmethod
    def constant(cls, dim: int, c: complex) -> "DiagonalGenerator":
        return cls("constant", dim, {"c": c})

    # symbol ----------------------------------------------------------------
    def symbol(self, dim: int | None = None) -> np.ndarray:
        """The symbol ``(m_1, ..., m_dim)``; defaults to the model's own truncation."""
        dim = self.dim if dim is None else dim
        n = np.arange(1, dim + 1, dtype=float)
        if self.kind == "constant":
            c = self.params["c"]
            return np.full(dim, c, dtype=complex if isinstance(c, complex) else float)
        if self.kind == "linear":
            return self.params.get("slope", -1.0) * n + self.params.get("offset", 0.0)
        if self.kind == "rotation":
            return self.params.get("shift", 0.0) + 1j * self.params.get("theta", 1.0) * n
        vals = np.asarray(self.params["values"])
        if dim > vals.size:
            raise ValueError(f"explicit symbol only has {vals.size} entries")
        return vals[:dim]

    @property
    def m(self) -> np.ndarray:
        return self._m

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self._m) or bool(np.all(self._m.imag == 0))

    @property
    def is_bounded(self) -> bool:
        """True when ``D(A) = X`` (the symbol is bounded uniformly in truncation)."""
        return self.kind in ("constant", "list")

    @property
    def sup_re(self) -> float:
        return float(np.max(np.real(self._m)))

    @property
    def invertible(self) -> bool:
        return self.sup_re < 0

    @property
    def delta(self) -> float:
        """Distance ``-sup Re m_n`` of the symbol from the imaginary axis."""
        return -self.sup_re

    def truncate(self, dim: int) -> "DiagonalGenerator":
        if self.kind == "list":
            return DiagonalGenerator.from_list(self.symbol(dim))
        return DiagonalGenerator(self.kind, dim, dict(self.params))

    def to_dict(self) -> dict:
        params = {k: ([_jsonable(v) for v in val] if isinstance(val, tuple) else _jsonable(val))
                  for k, val in self.params.items()}
        return {"kind": self.kind, "dim": self.dim, "params": params}


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


@dataclass(frozen=True)
class BoundedOp:
    """A bounded operator ``U -> X`` or ``U -> X_{-1}`` on the truncation."""

    kind: Literal["diagonal", "dense", "identity", "zero"]
    dim: int
    data: np.ndarray | None = None
    codomain: Literal["X", "Xminus1"] = "X"

    def __post_init__(self):
        if self.kind in ("diagonal", "dense"):
            d = np.array(self.data)
            expected = (self.dim,) if self.kind == "diagonal" else (self.dim, self.dim)
            if d.shape != expected:
                raise ValueError(f"{self.kind} operator data must have shape {expected}, got {d.shape}")
            if not np.all(np.isfinite(d)):
                raise ValueError("operator has non-finite entries")
            d.setflags(write=False)
            object.__setattr__(self, "data", d)
        elif self.kind not in ("identity", "zero"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.codomain not in ("X", "Xminus1"):
            raise ValueError("codomain must be 'X' or 'Xminus1'")

    @classmethod
    def identity(cls, dim: int, codomain="X") -> "BoundedOp":
        return cls("identity", dim, codomain=codomain)

    @classmethod
    def zero(cls, dim: int, codomain="X") -> "BoundedOp":
        return cls("zero", dim, codomain=codomain)

    @classmethod
    def diagonal(cls, values, codomain="X") -> "BoundedOp":
        v = np.asarray(values)
        return cls("diagonal", v.size, v, codomain)

    @classmethod
    def dense(cls, matrix, codomain="X") -> "BoundedOp":
        a = np.asarray(matrix)
        return cls("dense", a.shape[0], a, codomain)

    @classmethod
    def extension_of(cls, A: DiagonalGenerator) -> "BoundedOp":
        """``A_{-1}``: the generator seen as a bounded map ``X -> X_{-1}``."""
        return cls("diagonal", A.dim, np.array(A.m), "Xminus1")

    @property
    def is_diagonal(self) -> bool:
        return self.kind != "dense"

    def diag(self) -> np.ndarray:
        if self.kind == "identity":
            return np.ones(self.dim)
        if self.kind == "zero":
            return np.zeros(self.dim)
        if self.kind == "diagonal":
            return self.data
        raise TypeError("dense operator has no diagonal representation")

    def matrix(self) -> np.ndarray:
        if self.kind == "dense":
            return self.data
        return np.diag(self.diag())

    def apply_many(self, xs: np.ndarray) -> np.ndarray:
        """Apply to every row of ``xs`` (shape ``(K, dim)``)."""
        if xs.shape[-1] != self.dim:
            raise DimensionError(self.dim, xs.shape[-1])
        if self.kind == "identity":
            return xs
        if self.kind == "zero":
            return np.zeros_like(xs)
        if self.kind == "diagonal":
            return xs * self.data
        return xs @ self.data.T

    def op_bound(self, p_weights, q_weights=None) -> float:
        """Smallest ``C`` with ``q(Bx) <= C p(x)`` for weighted-sup seminorms."""
        p = np.asarray(p_weights, dtype=float)
        q = p if q_weights is None else np.asarray(q_weights, dtype=float)
        M = np.abs(self.matrix())
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(M > 0, M / p[None, :], 0.0)
        return float(np.max(q * ratio.sum(axis=1)))


def apply(op: DiagonalGenerator | BoundedOp, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (op.dim,):
        raise DimensionError(op.dim, x.size)
    if isinstance(op, DiagonalGenerator):
        return op.m * x
    return op.apply_many(x[None, :])[0]


def a_inv(A: DiagonalGenerator, x) -> np.ndarray:
    if not A.invertible:
        raise NotInvertibleError(A.sup_re)
    x = np.asarray(x)
    if x.shape != (A.dim,):
        raise DimensionError(A.dim, x.size)
    return x / A.m


def extrapolate_space(family: SeminormFamily, A: DiagonalGenerator) -> SeminormFamily:
    """Seminorms ``p(A^{-1} x)`` of ``X_{-1}``: weights ``w_n / |m_n|``."""
    if not A.invertible:
        raise NotInvertibleError(A.sup_re)
    if family.dim != A.dim:
        raise DimensionError(A.dim, family.dim, what="seminorm family")
    absm = np.abs(A.m)
    return SeminormFamily(tuple(w / absm for w in family.weights),
                          tuple(f"{lab}_-1" for lab in family.labels))


# domain membership -----------------------------------------------------------

@dataclass(frozen=True)
class DomainPolicy:
    non_member_slope: float = 0.2
    member_slope: float = 0.05
    min_dim: int = 8
    bound_slack: float = 1e-8


@dataclass(frozen=True)
class DomainCertificate:
    verdict: Verdict
    evidence: dict

    @property
    def member(self) -> bool:
        return self.verdict == "member"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "evidence": dict(self.evidence)}


def _growth_slope(dims: list[int], sups: list[float]) -> float:
    pts = [(np.log(k), np.log(s)) for k, s in zip(dims, sups) if s > 0]
    if len(pts) < 2:
        return 0.0
    lk, ls = np.array(pts).T
    return float(np.polyfit(lk, ls, 1)[0])


def in_domain(
    A: DiagonalGenerator,
    x,
    policy: DomainPolicy | None = None,
    bound: float | None = None,
) -> DomainCertificate:
    """Three-valued membership test for ``D(A)`` at finite truncation.

    ``bound``, when given, is a caller-proven bound on ``sup_n |m_n x_n|`` valid
    for every truncation; it is accepted only if the data respect it.
    """
    policy = policy or DomainPolicy()
    x = as_vector(x, A.dim)
    Ax = np.abs(A.m * x)
    sup_val = float(np.max(Ax))

    if A.is_bounded:
        return DomainCertificate("member", {"kind": "closed_form_bound", "bound": sup_val,
                                            "reason": "bounded symbol"})
    if bound is not None and sup_val <= bound + policy.bound_slack:
        return DomainCertificate("member", {"kind": "closed_form_bound", "bound": float(bound),
                                            "sup": sup_val})
    nz = np.flatnonzero(x)
    if nz.size == 0:
        return DomainCertificate("member", {"kind": "closed_form_bound", "bound": 0.0})
    if nz[-1] + 1 <= max(1, A.dim // 4):
        return DomainCertificate("member", {"kind": "closed_form_bound", "bound": sup_val,
                                            "reason": f"finite support up to {nz[-1] + 1}"})
    if A.dim < policy.min_dim:
        return DomainCertificate("inconclusive", {"kind": "threshold_check", "sup": sup_val,
                                                  "reason": "truncation too small for growth test"})
    dims = sorted({max(1, A.dim // 4), max(1, A.dim // 2), A.dim})
    sups = [float(np.max(Ax[:k])) for k in dims]
    slope = _growth_slope(dims, sups)
    evidence = {"kind": "growth_exponent", "slope": slope, "dims_tested": dims, "sups": sups}
    if slope > policy.non_member_slope:
        return DomainCertificate("non_member", evidence)
    if slope < policy.member_slope:
        return DomainCertificate("member", {"kind": "threshold_check", "sup": sup_val, "slope": slope,
                                            "dims_tested": dims})
    return DomainCertificate("inconclusive", evidence)
