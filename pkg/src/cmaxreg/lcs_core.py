"""Truncated sequence-space model of a Hausdorff locally convex space.

Vectors are plain 1-D numpy arrays holding the first ``N`` coordinates of a
sequence whose tail is zero.  Seminorms are weighted suprema
``p(x) = sup_n w_n |x_n|``; a :class:`SeminormFamily` is a finite list of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when two objects living on different truncations are combined."""

    def __init__(self, expected: int, got: int, what: str = "vector"):
        super().__init__(f"{what} has length {got}, expected {expected}")
        self.expected = expected
        self.got = got


def as_vector(coords, dim: int | None = None) -> np.ndarray:
    """Validate and return ``coords`` as a finite 1-D float or complex array."""
    x = np.asarray(coords)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"expected a non-empty 1-D coordinate list, got shape {x.shape}")
    if not np.issubdtype(x.dtype, np.complexfloating):
        x = x.astype(float)
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite coordinates")
    if dim is not None and x.size != dim:
        raise DimensionError(dim, x.size)
    return x


def unit(k: int, dim: int) -> np.ndarray:
    """Canonical basis vector ``e_k`` (1-based, as in sequence notation)."""
    if not 1 <= k <= dim:
        raise ValueError(f"index {k} outside 1..{dim}")
    e = np.zeros(dim)
    e[k - 1] = 1.0
    return e


def seminorm_eval(weights, x) -> float:
    w = np.asarray(weights, dtype=float)
    x = np.asarray(x)
    if w.shape != x.shape:
        raise DimensionError(w.size, x.size)
    if x.size == 0:
        return 0.0
    return float(np.max(w * np.abs(x)))


def _check_weights(w: np.ndarray, label: str) -> None:
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"weight {label!r} must be a non-empty 1-D array")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError(f"weight {label!r} must be finite and non-negative")


@dataclass(frozen=True)
class SeminormFamily:
    """Finite family of weighted-sup seminorms on ``K^N``.

    The family must be Hausdorff at truncation: every coordinate is seen by
    at least one member.
    """

    weights: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        ws = tuple(np.array(w, dtype=float) for w in self.weights)
        if not ws:
            raise ValueError("a seminorm family needs at least one member")
        labels = tuple(self.labels) or tuple(f"p{j}" for j in range(len(ws)))
        if len(labels) != len(ws):
            raise ValueError("one label per weight vector")
        dim = ws[0].size
        for w, lab in zip(ws, labels):
            _check_weights(w, lab)
            if w.size != dim:
                raise DimensionError(dim, w.size, what=f"weight {lab!r}")
        blind = np.flatnonzero(np.max(np.vstack(ws), axis=0) == 0)
        if blind.size:
            raise ValueError(
                f"family is not Hausdorff: coordinate {blind[0] + 1} has zero weight in every member"
            )
        for w in ws:
            w.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.weights[0].size

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, key: int | str) -> np.ndarray:
        if isinstance(key, str):
            return self.weights[self.labels.index(key)]
        return self.weights[key]

    def items(self):
        return zip(self.labels, self.weights)

    def evaluate(self, x) -> np.ndarray:
        """All member seminorms of ``x`` at once."""
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise DimensionError(self.dim, x.size)
        return np.max(np.vstack(self.weights) * np.abs(x), axis=1)

    def envelope(self) -> np.ndarray:
        return np.max(np.vstack(self.weights), axis=0)

    def truncate(self, dim: int) -> "SeminormFamily":
        return SeminormFamily(tuple(w[:dim] for w in self.weights), self.labels)

    @classmethod
    def sup(cls, dim: int) -> "SeminormFamily":
        return cls((np.ones(dim),), ("sup",))

    @classmethod
    def prefixes(cls, dim: int) -> "SeminormFamily":
        """Indicators of the first ``k`` coordinates, ``k = 1..dim``."""
        ws = tuple((np.arange(dim) < k).astype(float) for k in range(1, dim + 1))
        return cls(ws, tuple(f"first{k}" for k in range(1, dim + 1)))

    @classmethod
    def beta0(cls, dim: int, scales: Sequence[float] = (1.0, 4.0, 16.0)) -> "SeminormFamily":
        """Weights ``v_n = 1 / (1 + n/s)`` vanishing at infinity, one per scale ``s``.

        These are the substrict-topology seminorms ``sup_n v_n |x_n|`` restricted
        to the truncation.
        """
        n = np.arange(1, dim + 1, dtype=float)
        ws = tuple(1.0 / (1.0 + n / s) for s in scales)
        return cls(ws, tuple(f"v{s:g}" for s in scales))


def family_sup(family: SeminormFamily, x) -> float:
    """``max_j p_j(x)``; the sup-norm when the envelope is all ones."""
    if len(family) == 0:
        raise ValueError("empty seminorm family")
    return float(np.max(family.evaluate(x)))


def pair(y, x):
    """Dual pairing ``<y, x> = sum_n y_n x_n`` (bilinear, no conjugation)."""
    y = np.asarray(y)
    x = np.asarray(x)
    if y.shape != x.shape:
        raise DimensionError(y.size, x.size)
    val = np.sum(y * x)
    return complex(val) if np.iscomplexobj(val) else float(val)
