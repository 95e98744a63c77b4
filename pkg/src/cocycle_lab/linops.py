"""Operator arithmetic on GL(d, R).

``OperatorValue`` caches an invertible matrix together with its inverse and
spectral norms.  The group metric is ``d(A, B) = |A - B| + |A^-1 - B^-1|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

INVERSE_RESIDUAL_TOL = 1e-10


class LinopsError(ValueError):
    pass


class NotApplicableError(LinopsError):
    pass


def op_norm(A) -> float:
    """Spectral norm (largest singular value) via SVD."""
    A = np.asarray(A, dtype=float)
    if not np.isfinite(A).all():
        raise LinopsError("matrix has non-finite entries")
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[0])


def sigma_min(A) -> float:
    return float(np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)[-1])


@dataclass(frozen=True, eq=False)
class OperatorValue:
    """An element of GL(d) with cached inverse and norms.

    The inverse is computed here unless supplied (products along a cocycle
    carry the product of the inverses).  Construction rejects inputs whose
    residual ``|A A^-1 - Id|`` exceeds ``1e-10 * max(1, Q(A))``.
    """

    matrix: np.ndarray
    inverse: np.ndarray = None
    op_norm: float = field(init=False)
    inv_op_norm: float = field(init=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise LinopsError(f"expected a square matrix, got shape {A.shape}")
        if not np.isfinite(A).all():
            raise LinopsError("matrix has non-finite entries")
        if self.inverse is None:
            try:
                Ai = np.linalg.inv(A)
            except np.linalg.LinAlgError as exc:
                raise LinopsError("matrix is singular") from exc
        else:
            Ai = np.array(self.inverse, dtype=float)
        if not np.isfinite(Ai).all():
            raise LinopsError("matrix is numerically singular")
        n, ni = op_norm(A), op_norm(Ai)
        resid = op_norm(A @ Ai - np.eye(A.shape[0]))
        if resid > INVERSE_RESIDUAL_TOL * max(1.0, n * ni):
            raise LinopsError(f"inverse residual {resid:.3e} too large; matrix ill-conditioned")
        A.setflags(write=False)
        Ai.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "inverse", Ai)
        object.__setattr__(self, "op_norm", n)
        object.__setattr__(self, "inv_op_norm", ni)

    @classmethod
    def identity(cls, d: int) -> "OperatorValue":
        return cls(np.eye(d), np.eye(d))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def Q(self) -> float:
        return self.op_norm * self.inv_op_norm

    def inv(self) -> "OperatorValue":
        return OperatorValue(self.inverse, self.matrix)

    def __matmul__(self, other: "OperatorValue") -> "OperatorValue":
        return OperatorValue(self.matrix @ other.matrix, other.inverse @ self.inverse)

    def __repr__(self):
        return f"OperatorValue({np.array2string(self.matrix, precision=4)})"

    def to_list(self) -> list:
        return self.matrix.tolist()


def as_operator(A) -> OperatorValue:
    return A if isinstance(A, OperatorValue) else OperatorValue(A)


def _same_dim(A: OperatorValue, B: OperatorValue):
    if A.dim != B.dim:
        raise LinopsError(f"dimension mismatch: {A.dim} vs {B.dim}")


def gl_distance(A, B) -> float:
    A, B = as_operator(A), as_operator(B)
    _same_dim(A, B)
    return op_norm(A.matrix - B.matrix) + op_norm(A.inverse - B.inverse)


def quasiconformal(A) -> float:
    """``Q(A) = |A| |A^-1|``."""
    return as_operator(A).Q


class DistortionCheck(NamedTuple):
    ok: bool
    r: float
    ratio: float
    lower: float
    upper: float


def distortion_ratio_bounds(A, B, rtol: float = 1e-12) -> DistortionCheck:
    """Check ``(1-r)/(1+r) <= Q(A)/Q(B) <= (1+r)/(1-r)``.

    ``r = min(|A^-1 B - Id|, |A B^-1 - Id|)`` must be below 1.
    """
    A, B = as_operator(A), as_operator(B)
    _same_dim(A, B)
    I = np.eye(A.dim)
    r = min(op_norm(A.inverse @ B.matrix - I), op_norm(A.matrix @ B.inverse - I))
    if r >= 1.0:
        raise NotApplicableError(f"r = {r:.4f} >= 1")
    ratio = A.Q / B.Q
    lower, upper = (1 - r) / (1 + r), (1 + r) / (1 - r)
    ok = lower * (1 - rtol) <= ratio <= upper * (1 + rtol)
    return DistortionCheck(bool(ok), r, ratio, lower, upper)


class CompositionCheck(NamedTuple):
    ok: bool
    lhs: float
    rhs: float


def composition_distance_bound(A, At, B, Bt, M_bound: float,
                               rtol: float = 1e-12) -> CompositionCheck:
    """Check ``d(AB, At Bt) <= M (d(A, At) + d(B, Bt))``.

    Every operator and every inverse must have norm at most ``M_bound``.
    """
    ops = [as_operator(X) for X in (A, At, B, Bt)]
    for X in ops[1:]:
        _same_dim(ops[0], X)
    worst = max(max(X.op_norm, X.inv_op_norm) for X in ops)
    if worst > M_bound:
        raise LinopsError(f"norm hypothesis violated: {worst:.4f} > M = {M_bound}")
    A, At, B, Bt = ops
    lhs = gl_distance(A @ B, At @ Bt)
    rhs = M_bound * (gl_distance(A, At) + gl_distance(B, Bt))
    return CompositionCheck(bool(lhs <= rhs * (1 + rtol) + 1e-15), lhs, rhs)
