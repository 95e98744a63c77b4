"""Norms on R^d of the form ``phi(v) = max_i |A_i v|`` and their metric geometry.

Every quantity defined as a supremum over the unit ball is returned as an
``Interval`` that encloses the true value.  In dimension 2 the inclusion
distance is computed exactly (up to rounding) from the quadratic forms
``|A_i v|^2``; elsewhere the enclosure combines sphere samples (lower) with
the operator-norm bound ``max_i min_j |A_i B_j^-1|`` (upper).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels as K
from .linops import OperatorValue, as_operator

PRUNE_TOL = 1e-12
SPHERE_SAMPLES = 4096
EXACT_MARGIN = 1e-10
REFINE_TOL = 1e-10
REFINE_LEVELS = 48
REFINE_START = 256
REFINE_BUDGET = 200_000


class NormSpaceError(ValueError):
    pass


class NotInNKError(NormSpaceError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise NormSpaceError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


def _pair_norms(A: np.ndarray, Binv: np.ndarray) -> np.ndarray:
    """``D[i, j] = |A_i B_j^-1|``."""
    prod = np.einsum("ikl,jlm->ijkm", A, Binv)
    n1, n2, d, _ = prod.shape
    return K.spectral_norms(prod.reshape(n1 * n2, d, d)).reshape(n1, n2)


def _polar(A: np.ndarray) -> np.ndarray:
    # |A v| = |S v| with S = sqrt(A^T A); rotations collapse to Id
    U, s, Vt = np.linalg.svd(A)
    S = np.einsum("nji,nj,njk->nik", Vt, s, Vt)
    return 0.5 * (S + np.swapaxes(S, 1, 2))


def _prune_order(D: np.ndarray, tol: float = PRUNE_TOL) -> np.ndarray:
    """Indices kept after dropping pointwise-dominated generators.

    ``i`` is dominated by ``j`` when ``D[i, j] <= 1 + tol``; between two
    generators that dominate each other the lower index survives.
    """
    n = D.shape[0]
    dom = D <= 1.0 + tol
    np.fill_diagonal(dom, False)
    mutual = dom & dom.T
    earlier = np.arange(n)[None, :] < np.arange(n)[:, None]
    drop = (dom & (~mutual | earlier)).any(axis=1)
    return np.flatnonzero(~drop)


class NormRep:
    """A norm ``phi(v) = max_i |A_i v|`` (Euclidean background).

    Generators are stored as the symmetric positive factors ``sqrt(A^T A)``,
    which define the same norm, and are pruned so that none is pointwise
    dominated by another.
    """

    __slots__ = ("_gens", "_invs", "_K", "_opnorm")

    def __init__(self, generators, prune: bool = True, _normalized: bool = False):
        G = np.asarray([as_operator(g).matrix if isinstance(g, OperatorValue) else g
                        for g in generators], dtype=float)
        if G.ndim != 3 or G.shape[0] == 0 or G.shape[1] != G.shape[2]:
            raise NormSpaceError("need a nonempty list of square matrices")
        if not np.isfinite(G).all():
            raise NormSpaceError("non-finite generator")
        if not _normalized:
            G = _polar(G)
        try:
            Gi = np.linalg.inv(G)
        except np.linalg.LinAlgError as exc:
            raise NormSpaceError("singular generator") from exc
        if prune and len(G) > 1:
            keep = _prune_order(_pair_norms(G, Gi))
            G, Gi = G[keep], Gi[keep]
        G.setflags(write=False)
        Gi.setflags(write=False)
        self._gens = G
        self._invs = Gi
        norms = K.spectral_norms(G)
        smin = 1.0 / K.spectral_norms(Gi)
        self._opnorm = float(norms.max())
        self._K = float(max(norms.max(), 1.0 / smin.max()))

    @classmethod
    def euclidean(cls, dim: int) -> "NormRep":
        return cls(np.eye(dim)[None], _normalized=True)

    @classmethod
    def from_dict(cls, data: dict) -> "NormRep":
        return cls(data["generators"])

    @property
    def generators(self) -> np.ndarray:
        return self._gens

    @property
    def inverses(self) -> np.ndarray:
        return self._invs

    @property
    def dim(self) -> int:
        return self._gens.shape[1]

    def __len__(self) -> int:
        return self._gens.shape[0]

    @property
    def K(self) -> float:
        """Smallest ``K`` with ``K^-1 |v| <= phi(v) <= K |v|`` implied by the generators."""
        return self._K

    @property
    def sup_unit(self) -> float:
        """``max_{|v| = 1} phi(v)``."""
        return self._opnorm

    def quadratic_forms(self) -> np.ndarray:
        """Rows ``(m, p, s)`` with ``|A_i v|^2 = m + p cos 2a + s sin 2a`` (d = 2)."""
        if self.dim != 2:
            raise NormSpaceError("quadratic forms are only used in dimension 2")
        G = np.einsum("nji,njk->nik", self._gens, self._gens)
        a, b, c = G[:, 0, 0], G[:, 0, 1], G[:, 1, 1]
        return np.stack([(a + c) / 2, (a - c) / 2, b], axis=1)

    def __call__(self, v) -> np.ndarray | float:
        return eval_norm(self, v)

    def to_dict(self) -> dict:
        return {"generators": self._gens.tolist()}

    def __repr__(self):
        return f"NormRep(dim={self.dim}, generators={len(self)}, K={self._K:.4g})"


def _check_dims(*phis: NormRep):
    dims = {p.dim for p in phis}
    if len(dims) != 1:
        raise NormSpaceError(f"dimension mismatch: {sorted(dims)}")


def eval_norm(phi: NormRep, v):
    """``max_i |A_i v|``; ``v`` may be a single vector or a stack of rows."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != phi.dim:
        raise NormSpaceError(f"vector of length {v.shape[-1]} for a norm on R^{phi.dim}")
    vals = np.linalg.norm(np.einsum("nij,...j->...ni", phi.generators, v), axis=-1).max(axis=-1)
    return float(vals) if vals.ndim == 0 else vals


def pullback(A, phi: NormRep) -> NormRep:
    """``A*phi(v) = phi(A v)``: generators ``A_i A``."""
    A = as_operator(A)
    if A.dim != phi.dim:
        raise NormSpaceError(f"dimension mismatch: {A.dim} vs {phi.dim}")
    return NormRep(phi.generators @ A.matrix)


def max_norms(phis: Sequence[NormRep]) -> NormRep:
    """Pointwise maximum: union of generator sets, pruned."""
    if len(phis) == 0:
        raise NormSpaceError("max of an empty list of norms")
    _check_dims(*phis)
    return NormRep(np.concatenate([p.generators for p in phis]), _normalized=True)


@lru_cache(maxsize=16)
def sphere_samples(dim: int, n: int = SPHERE_SAMPLES) -> np.ndarray:
    """Deterministic unit vectors: uniform half-circle angles, Fibonacci sphere, or seeded Gaussians."""
    if dim == 1:
        out = np.ones((1, 1))
    elif dim == 2:
        a = np.pi * np.arange(n) / n
        out = np.stack([np.cos(a), np.sin(a)], axis=1)
    elif dim == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        r = np.sqrt(1 - z * z)
        t = np.pi * (1 + 5 ** 0.5) * i
        out = np.stack([r * np.cos(t), r * np.sin(t), z], axis=1)
    else:
        g = np.random.default_rng(0).standard_normal((n, dim))
        out = g / np.linalg.norm(g, axis=1, keepdims=True)
    out.setflags(write=False)
    return out


def _sup_ratio_upper(phi1: NormRep, phi2: NormRep) -> float:
    """``max_i min_j |A_i B_j^-1|`` bounds ``sup phi1 / phi2``."""
    return float(_pair_norms(phi1.generators, phi2.inverses).min(axis=1).max())


def _sup_ratio_exact_2d(phi1: NormRep, phi2: NormRep) -> float:
    return math.sqrt(K.sup_ratio_2d(phi1.quadratic_forms(), phi2.quadratic_forms()))


def norm_distance(phi1: NormRep, phi2: NormRep) -> Interval:
    """Enclosure of ``log max(sup phi1/phi2, sup phi2/phi1)``."""
    _check_dims(phi1, phi2)
    if len(phi1) == 1 and len(phi2) == 1:
        A, B = phi1.generators[0], phi2.generators[0]
        val = math.log(max(K.spectral_norms((A @ phi2.inverses[0])[None])[0],
                           K.spectral_norms((B @ phi1.inverses[0])[None])[0], 1.0))
        return Interval(val, val)
    hi = math.log(max(_sup_ratio_upper(phi1, phi2), _sup_ratio_upper(phi2, phi1), 1.0))
    if phi1.dim == 2:
        # the maximising angle is a candidate of the exact kernel, so sampling adds nothing
        exact = math.log(max(_sup_ratio_exact_2d(phi1, phi2),
                             _sup_ratio_exact_2d(phi2, phi1), 1.0))
        lo = exact - 1e-12
        hi = min(hi, exact + EXACT_MARGIN)
    else:
        V = sphere_samples(phi1.dim)
        n1, n2 = eval_norm(phi1, V), eval_norm(phi2, V)
        lo = math.log(max(float((n1 / n2).max()), float((n2 / n1).max()), 1.0))
    lo = min(lo, hi)
    return Interval(max(lo, 0.0), max(hi, 0.0))


@lru_cache(maxsize=4)
def _cube_grid(n: int) -> tuple:
    c = -1 + (2 * np.arange(n) + 1) / n
    u, w = np.meshgrid(c, c, indexing="ij")
    u, w = u.ravel(), w.ravel()
    one = np.ones_like(u)
    faces = []
    for s in (1.0, -1.0):
        faces += [np.stack([s * one, u, w], 1), np.stack([u, s * one, w], 1),
                  np.stack([u, w, s * one], 1)]
    P = np.concatenate(faces)
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    # radial projection of the cube surface onto the sphere is 1-Lipschitz
    return P, math.sqrt(2) / n


def _cell_terms(forms: np.ndarray, c: np.ndarray, w: np.ndarray):
    """Derivative data of ``h(t) = max_j sqrt(g_j(t))`` on cells ``[c - w, c + w]``.

    ``g_j(t) = m + p cos 2t + s sin 2t``, so ``|g'| <= 2r`` and ``|g''| <= 4r``
    with ``r = |(p, s)|``, and ``g >= m - r`` everywhere.  Returns a slope
    bound for ``h``, a mask of cells where a single generator is active, and
    for those the centre slope and a bound on ``|h''|``.
    """
    m, p, s = forms[:, 0][None], forms[:, 1][None], forms[:, 2][None]
    r = np.hypot(p, s)
    c2, s2 = np.cos(2 * c)[:, None], np.sin(2 * c)[:, None]
    w = w[:, None]
    gc = m + p * c2 + s * s2
    gmin = np.maximum(gc - 2 * r * w, m - r)
    gmax = gc + 2 * r * w
    num = s * c2 - p * s2
    slope = ((np.abs(num) + 2 * r * w) / np.sqrt(gmin)).max(axis=1)
    active = gmax >= gmin.max(axis=1, keepdims=True)
    single = active.sum(axis=1) == 1
    j = active.argmax(axis=1)
    rows = np.arange(len(c))
    d_centre = num[rows, j] / np.sqrt(gc[rows, j])
    hmin = np.sqrt(gmin[rows, j])
    rj = np.broadcast_to(r, gc.shape)[rows, j]
    curv = 2 * rj / hmin + rj ** 2 / hmin ** 3
    return slope, single, d_centre, curv


def _refined_bound_2d(phi1: NormRep, phi2: NormRep) -> float:
    """Branch and bound for ``max_t |phi1(u_t) - phi2(u_t)|`` over ``t`` in ``[0, pi]``.

    On a cell with endpoint values ``fa, fb`` and slope bound ``L`` the
    maximum is at most ``(fa + fb) / 2 + L h / 2``.  Taking ``L`` from the
    second derivative where one generator of each norm is active makes the
    excess quadratic in ``h`` near a smooth maximum.  Cells that cannot beat
    the best sampled value by more than ``REFINE_TOL`` are closed; the rest
    are bisected until none remain or the budget runs out.
    """
    f1, f2 = phi1.quadratic_forms(), phi2.quadratic_forms()

    def f(t):
        V = np.stack([np.cos(t), np.sin(t)], axis=1)
        return np.abs(eval_norm(phi1, V) - eval_norm(phi2, V))

    def bound(a, b, fa, fb):
        c, w = 0.5 * (a + b), 0.5 * (b - a)
        l1, one1, d1, k1 = _cell_terms(f1, c, w)
        l2, one2, d2, k2 = _cell_terms(f2, c, w)
        slope = l1 + l2
        # where phi1 - phi2 is smooth, its slope is small near a maximum
        smooth = one1 & one2
        slope[smooth] = np.minimum(slope[smooth],
                                   (np.abs(d1 - d2) + w * (k1 + k2))[smooth])
        return 0.5 * (fa + fb) + slope * w

    n = REFINE_START
    t = np.pi * np.arange(n + 1) / n
    ft = f(t)
    a, b, fa, fb = t[:-1], t[1:], ft[:-1], ft[1:]
    best = float(ft.max())
    tol = REFINE_TOL * max(phi1.sup_unit, phi2.sup_unit)
    closed = 0.0
    for _ in range(REFINE_LEVELS):
        ub = bound(a, b, fa, fb)
        open_ = ub > best + tol
        if (~open_).any():
            closed = max(closed, float(ub[~open_].max()))
        a, b, fa, fb = a[open_], b[open_], fa[open_], fb[open_]
        if not len(a) or len(a) > REFINE_BUDGET:
            break
        m = 0.5 * (a + b)
        fm = f(m)
        best = max(best, float(fm.max()))
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        fa, fb = np.concatenate([fa, fm]), np.concatenate([fm, fb])
    if len(a):
        closed = max(closed, float(bound(a, b, fa, fb).max()))
    return max(best, closed)


def _grid_bound(phi1: NormRep, phi2: NormRep) -> float:
    lip = phi1.sup_unit + phi2.sup_unit
    if phi1.dim == 1:
        return abs(float(eval_norm(phi1, [1.0]) - eval_norm(phi2, [1.0])))
    if phi1.dim == 2:
        return _refined_bound_2d(phi1, phi2)
    P, rad = _cube_grid(40)
    return float(np.abs(eval_norm(phi1, P) - eval_norm(phi2, P)).max()) + lip * rad


def norm_distance_prime(phi1: NormRep, phi2: NormRep, method: str = "auto") -> Interval:
    """Enclosure of ``sup_{|v| <= 1} |phi1(v) - phi2(v)|``.

    ``method`` is ``"grid"`` (Lipschitz-corrected grid, d <= 3),
    ``"algebraic"`` (``(e^dist - 1) max(|phi1|, |phi2|)``) or ``"auto"``
    (both where available, keeping the smaller).
    """
    _check_dims(phi1, phi2)
    if method not in ("auto", "grid", "algebraic"):
        raise NormSpaceError(f"unknown method {method!r}")
    if method == "grid" and phi1.dim > 3:
        raise NormSpaceError("grid enclosure is only available for d <= 3")
    V = sphere_samples(phi1.dim)
    lo = float(np.abs(eval_norm(phi1, V) - eval_norm(phi2, V)).max())
    dist = norm_distance(phi1, phi2)
    hi = math.inf
    if method in ("auto", "algebraic"):
        hi = math.expm1(dist.hi) * max(phi1.sup_unit, phi2.sup_unit)
    if method == "grid" or (method == "auto" and phi1.dim <= 3):
        hi = min(hi, _grid_bound(phi1, phi2))
    if dist.hi == 0.0:
        lo = hi = 0.0
    return Interval(min(lo, hi), hi)


def in_NK(phi: NormRep, K_bound: float, rtol: float = 1e-12) -> bool:
    return phi.K <= K_bound * (1 + rtol)


def _require_NK(K_bound: float, **phis: NormRep):
    for name, p in phis.items():
        if not in_NK(p, K_bound):
            raise NotInNKError(f"{name} has equivalence constant {p.K:.6g} > K = {K_bound}")


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of one inequality check; ``checks`` holds ``(name, lhs, rhs, ok)``."""

    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c[3] for c in self.checks)

    def to_dict(self) -> dict:
        return {"ok": self.ok,
                "checks": [{"name": n, "lhs": l, "rhs": r, "ok": o} for n, l, r, o in self.checks]}


def _le(lhs: float, rhs: float, rtol: float = 1e-9, atol: float = 1e-12) -> bool:
    return lhs <= rhs * (1 + rtol) + atol


def check_metric_equivalence(phi1: NormRep, phi2: NormRep, K_bound: float) -> LemmaReport:
    """``dist' <= K^3 dist`` and ``dist <= K dist'`` on favourable endpoints."""
    _check_dims(phi1, phi2)
    _require_NK(K_bound, phi1=phi1, phi2=phi2)
    d = norm_distance(phi1, phi2)
    dp = norm_distance_prime(phi1, phi2)
    a = (dp.lo, K_bound ** 3 * d.hi)
    b = (d.lo, K_bound * dp.hi)
    return LemmaReport((("prime_le_K3_dist", *a, _le(*a)),
                        ("dist_le_K_prime", *b, _le(*b))))


def check_pullback_lipschitz(A, A_tilde, phi: NormRep, K_bound: float) -> LemmaReport:
    """``dist(A*phi, Ã*phi) <= K^4 |A - Ã|``."""
    A, At = as_operator(A), as_operator(A_tilde)
    pa, pt = pullback(A, phi), pullback(At, phi)
    _require_NK(K_bound, phi=phi, pullback_A=pa, pullback_A_tilde=pt)
    lhs = norm_distance(pa, pt).lo
    diff = A.matrix - At.matrix
    rhs = K_bound ** 4 * float(K.spectral_norms(diff[None])[0])
    return LemmaReport((("pullback_lipschitz", lhs, rhs, _le(lhs, rhs)),))


def check_max_inequality(phis: Sequence[NormRep], phis_tilde: Sequence[NormRep]) -> LemmaReport:
    """``dist(max phi_i, max phi~_i) <= max_i dist(phi_i, phi~_i)``."""
    if len(phis) != len(phis_tilde):
        raise NormSpaceError(f"length mismatch: {len(phis)} vs {len(phis_tilde)}")
    if not phis:
        raise NormSpaceError("empty lists")
    lhs = norm_distance(max_norms(phis), max_norms(phis_tilde)).lo
    rhs = max(norm_distance(p, q).hi for p, q in zip(phis, phis_tilde))
    return LemmaReport((("max_inequality", lhs, rhs, _le(lhs, rhs)),))
