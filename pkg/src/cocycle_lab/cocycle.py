"""Locally constant matrix cocycles over a subshift of finite type.

A ``Generator`` assigns an invertible matrix to every admissible word of
length ``2r + 1``; ``A(x)`` reads the coordinates ``x_{-r} .. x_r``.  The
cocycle is ``A_x^n = A(f^{n-1} x) ... A(x)`` for ``n > 0`` and
``A_x^{-n} = (A^n_{f^{-n} x})^{-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _kernels as K
from .linops import OperatorValue, gl_distance
from .sft import Point, ShiftMetric, TransitionMatrix, is_in_local_stable


class CocycleError(ValueError):
    pass


class NotFiberBunchedError(CocycleError):
    pass


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _word_codes(symbols: np.ndarray, width: int, k: int) -> np.ndarray:
    """Base-``k`` codes of all length-``width`` windows along the last axis."""
    if width == 0:
        return np.zeros(symbols.shape[:-1] + (symbols.shape[-1] + 1,), dtype=np.int64)
    win = np.lib.stride_tricks.sliding_window_view(symbols, width, axis=-1)
    weights = k ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return win @ weights


@dataclass(frozen=True, eq=False)
class Generator:
    """Locally constant generator of depth ``r``: admissible (2r+1)-words to GL(d).

    ``table`` must cover exactly the admissible words.  ``beta`` is the
    declared Holder exponent; locally constant maps are Holder for every
    exponent, and ``beta`` scales the Holder constant and the bunching test.
    """

    matrix: TransitionMatrix
    depth: int
    table: Mapping
    beta: float = 1.0
    name: str = "table"

    def __post_init__(self):
        if self.depth < 0:
            raise CocycleError("depth must be >= 0")
        if not 0.0 < self.beta <= 1.0:
            raise CocycleError(f"beta must lie in (0, 1], got {self.beta}")
        table = {tuple(int(s) for s in w): (v if isinstance(v, OperatorValue)
                                            else OperatorValue(np.asarray(v, float)))
                 for w, v in dict(self.table).items()}
        expected = {tuple(int(s) for s in w) for w in self.matrix.words(2 * self.depth + 1)}
        if set(table) != expected:
            missing = sorted(expected - set(table))[:5]
            extra = sorted(set(table) - expected)[:5]
            raise CocycleError(f"table must cover the admissible {2 * self.depth + 1}-words "
                               f"exactly; missing {missing}, inadmissible {extra}")
        dims = {v.dim for v in table.values()}
        if len(dims) != 1:
            raise CocycleError(f"mixed dimensions in table: {sorted(dims)}")
        object.__setattr__(self, "table", table)

    # --- constructors -----------------------------------------------------
    @classmethod
    def from_function(cls, matrix: TransitionMatrix, depth: int,
                      fn: Callable[[tuple], np.ndarray], beta: float = 1.0,
                      name: str = "table") -> "Generator":
        words = [tuple(int(s) for s in w) for w in matrix.words(2 * depth + 1)]
        return cls(matrix, depth, {w: fn(w) for w in words}, beta, name)

    @classmethod
    def constant(cls, matrix, A, beta=1.0, name="constant"):
        A = np.asarray(A, dtype=float)
        return cls.from_function(matrix, 0, lambda w: A, beta, name)

    @classmethod
    def identity(cls, matrix, dim=2, beta=1.0):
        return cls.constant(matrix, np.eye(dim), beta, "identity")

    @classmethod
    def diagonal(cls, matrix, entries, beta=1.0):
        return cls.constant(matrix, np.diag(np.asarray(entries, float)), beta, "diagonal")

    @classmethod
    def per_symbol(cls, matrix, mats, beta=1.0):
        mats = [np.asarray(m, float) for m in mats]
        return cls.from_function(matrix, 0, lambda w: mats[w[0]], beta, "per_symbol")

    @classmethod
    def coboundary(cls, matrix, c_depth: int, c_table: Mapping, beta=1.0):
        """``A(x) = C(fx) C(x)^-1`` for a locally constant ``C`` of depth ``c_depth``."""
        ct = {tuple(w): np.asarray(v, float) for w, v in dict(c_table).items()}
        ci = {w: np.linalg.inv(v) for w, v in ct.items()}
        r = c_depth + 1

        def fn(w):
            return ct[w[2:]] @ ci[w[1:-1]]
        return cls.from_function(matrix, r, fn, beta, "coboundary")

    @classmethod
    def conjugated_rotation(cls, matrix, angles: Mapping, angle_depth: int = 0,
                            C=None, c_depth: int = 0, beta=1.0):
        """``A(x) = C(fx) R(theta(x)) C(x)^-1`` in dimension 2.

        ``angles`` maps (2*angle_depth+1)-words to angles.  ``C`` is either a
        single matrix (constant conjugacy) or a mapping from
        (2*c_depth+1)-words to matrices.
        """
        ang = {tuple(w): float(v) for w, v in dict(angles).items()}
        if C is None:
            C = np.eye(2)
        if isinstance(C, Mapping):
            ct = {tuple(w): np.asarray(v, float) for w, v in C.items()}
            r = max(angle_depth, c_depth + 1)
        else:
            C0 = np.asarray(C, float)
            ct = None
            r = angle_depth
        if ct is None:
            C0i = np.linalg.inv(C0)

            def fn(w):
                return C0 @ rotation(ang[w[r - angle_depth:r + angle_depth + 1]]) @ C0i
        else:
            ci = {w: np.linalg.inv(v) for w, v in ct.items()}

            def fn(w):
                cx = w[r - c_depth:r + c_depth + 1]
                cfx = w[r + 1 - c_depth:r + c_depth + 2]
                th = ang[w[r - angle_depth:r + angle_depth + 1]]
                return ct[cfx] @ rotation(th) @ ci[cx]
        return cls.from_function(matrix, r, fn, beta, "conjugated_rotation")

    # --- lookup -----------------------------------------------------------
    @property
    def dim(self) -> int:
        return next(iter(self.table.values())).dim

    @cached_property
    def words(self) -> np.ndarray:
        return self.matrix.words(2 * self.depth + 1)

    @cached_property
    def _arrays(self):
        k = self.matrix.k
        w = 2 * self.depth + 1
        words = self.words
        stack = np.stack([self.table[tuple(int(s) for s in row)].matrix for row in words])
        inv = np.stack([self.table[tuple(int(s) for s in row)].inverse for row in words])
        lut = np.full(k ** w, -1, dtype=np.intp)
        lut[_word_codes(words, w, k)[:, 0]] = np.arange(len(words))
        for a in (stack, inv, lut):
            a.setflags(write=False)
        return stack, inv, lut

    @property
    def stack(self) -> np.ndarray:
        return self._arrays[0]

    @property
    def inv_stack(self) -> np.ndarray:
        return self._arrays[1]

    def indices(self, symbols: np.ndarray) -> np.ndarray:
        """Table indices of ``A`` at every full window of ``symbols``.

        ``symbols`` covers coordinates ``a .. b-1``; the result has one entry
        per centre ``a + r .. b - 1 - r``.  Works row-wise on 2-D input.
        """
        codes = _word_codes(np.asarray(symbols, dtype=np.int64), 2 * self.depth + 1,
                            self.matrix.k)
        idx = self._arrays[2][codes]
        if (idx < 0).any():
            raise CocycleError("inadmissible window")
        return idx

    def value(self, x: Point) -> OperatorValue:
        r = self.depth
        return self.table[tuple(int(s) for s in x.window(-r, r + 1))]

    def forward_indices(self, x: Point, n: int) -> np.ndarray:
        """Indices of ``A(x), A(fx), ..., A(f^{n-1} x)``."""
        r = self.depth
        return self.indices(x.window(-r, n + r))

    def backward_indices(self, x: Point, n: int) -> np.ndarray:
        """Indices of ``A(f^{-1} x), ..., A(f^{-n} x)``."""
        r = self.depth
        return self.indices(x.window(-n - r, r))[::-1]

    def orbit_products(self, x: Point, m: int):
        """``(P, Pinv)`` for ``A_x^n``, ``n = -m .. m`` (index ``n + m``)."""
        Pf, Qf = K.chain_products(self.stack, self.inv_stack, self.forward_indices(x, m))
        Pb, Qb = K.chain_products(self.inv_stack, self.stack, self.backward_indices(x, m))
        P = np.concatenate([Pb[:0:-1], Pf])
        Q = np.concatenate([Qb[:0:-1], Qf])
        return P, Q

    def cyclic_products(self, words: np.ndarray):
        """``A_p^k`` for the periodic points with the given k-words (rows)."""
        words = np.atleast_2d(np.asarray(words, dtype=np.int64))
        k = words.shape[1]
        r = self.depth
        ext = words[:, np.arange(-r, k + r) % k]
        return K.batch_products(self.stack, self.inv_stack, self.indices(ext))

    def to_dict(self) -> dict:
        return {"depth": self.depth, "beta": self.beta, "name": self.name,
                "table": [{"word": [int(s) for s in w], "matrix": self.table[tuple(int(s) for s in w)].to_list()}
                          for w in self.words]}


def evaluate(g: Generator, x: Point, n: int) -> OperatorValue:
    """The cocycle value ``A_x^n``."""
    if n == 0:
        return OperatorValue.identity(g.dim)
    if n > 0:
        P, Q = K.chain_products(g.stack, g.inv_stack, g.forward_indices(x, n))
    else:
        P, Q = K.chain_products(g.inv_stack, g.stack, g.backward_indices(x, -n))
    return OperatorValue(P[-1], Q[-1])


def quasiconformal_distortion(g: Generator, x: Point, n: int) -> float:
    """``Q_A(x, n) = |A_x^n| |(A_x^n)^-1|``."""
    if n == 0:
        return 1.0
    return evaluate(g, x, n).Q


def distortions(P: np.ndarray, Pinv: np.ndarray) -> np.ndarray:
    return K.spectral_norms(P) * K.spectral_norms(Pinv)


def holder_constant(g: Generator, metric: ShiftMetric = ShiftMetric()) -> float:
    """Smallest ``c`` with ``d(A(x), A(y)) <= c dist(x, y)^beta``.

    Exact: two points at distance ``nu^j`` with ``j <= r`` first differ at a
    coordinate ``+-j`` inside the window, and points at distance below
    ``nu^r`` share the value of ``A``.
    """
    words = g.words
    r = g.depth
    N = len(words)
    # radius of first disagreement between every pair of words
    diff = words[:, None, :] != words[None, :, :]
    radius = np.abs(np.arange(-r, r + 1))
    first = np.where(diff, radius[None, None, :], r + 1).min(axis=2)
    best = 0.0
    for i in range(N):
        d = K.gl_distances(g.stack, g.inv_stack, g.stack[i], g.inv_stack[i])
        mask = first[i] <= r
        if mask.any():
            best = max(best, float((d[mask] / metric.nu ** (g.beta * first[i][mask])).max()))
    return best


@dataclass(frozen=True)
class BunchingCertificate:
    """``Q_A(x, n) nu^{beta |n|} <= L theta^|n|`` for every ``x`` and ``n``."""

    L: float
    theta: float
    witness_n: int
    q: tuple
    certified: bool = True

    def bound(self, n: int) -> float:
        return self.L * self.theta ** abs(n)

    def to_dict(self) -> dict:
        return {"certified": True, "L": self.L, "theta": self.theta,
                "witness_n": self.witness_n, "q": list(self.q)}


@dataclass(frozen=True)
class NotCertified:
    q: tuple
    reason: str
    certified: bool = False

    def to_dict(self) -> dict:
        return {"certified": False, "reason": self.reason, "q": list(self.q)}


def bunching_sequence(g: Generator, metric: ShiftMetric, horizon: int,
                      max_states: int = 250_000, stop_below_one: bool = True):
    """``q_n = max_x Q_A(x, n) nu^{beta n}`` for ``n = 0 .. horizon``.

    ``A_x^n`` depends on ``x_{-r} .. x_{n-1+r}``, so the maximum is a finite
    one over admissible words.  Words are extended one symbol at a time;
    states with the same trailing context and the same product are merged,
    which keeps constant and abelian generators polynomial.  Returns
    ``(q, exhausted)`` where ``exhausted`` flags that ``max_states`` was hit.
    """
    k = g.matrix.k
    r = g.depth
    width = 2 * r + 1
    ctx_len = max(2 * r, 1)
    allowed = g.matrix.array.astype(bool)
    words = g.words
    P = g.stack.copy()
    Pi = g.inv_stack.copy()
    ctx = _word_codes(words[:, -ctx_len:], ctx_len, k)[:, 0]
    scale = metric.nu ** g.beta
    q = [1.0, float(distortions(P, Pi).max() * scale)]
    exhausted = False
    wmod = k ** width
    cmod = k ** ctx_len
    lut = g._arrays[2]
    for n in range(2, horizon + 1):
        if stop_below_one and q[-1] < 1.0:
            break
        newP, newPi, newctx = [], [], []
        last = ctx % k
        for s in range(k):
            sel = allowed[last, s]
            if not sel.any():
                continue
            c = ctx[sel]
            wcode = (c * k + s) % wmod if r > 0 else np.full(c.shape, s)
            gi = lut[wcode]
            newP.append(np.matmul(g.stack[gi], P[sel]))
            newPi.append(np.matmul(Pi[sel], g.inv_stack[gi]))
            newctx.append((c * k + s) % cmod if r > 0 else np.full(c.shape, s))
        P = np.concatenate(newP)
        Pi = np.concatenate(newPi)
        ctx = np.concatenate(newctx)
        key = np.concatenate([ctx[:, None].astype(float),
                              np.round(P.reshape(len(P), -1), 9)], axis=1)
        _, keep = np.unique(key, axis=0, return_index=True)
        keep.sort()
        P, Pi, ctx = P[keep], Pi[keep], ctx[keep]
        q.append(float(distortions(P, Pi).max() * scale ** n))
        if len(P) * k > max_states:
            exhausted = True
            break
    return q, exhausted


def certify_fiber_bunching(g: Generator, metric: ShiftMetric = ShiftMetric(),
                           horizon: int = 20, max_states: int = 250_000):
    """Look for ``n <= horizon`` with ``q_n < 1``.

    On success ``theta = q_n^{1/n}`` and ``L = max_{j<n} q_j / theta^j``;
    submultiplicativity of ``q`` extends ``q_m <= L theta^m`` to every ``m``.
    The sequence is symmetric in ``n`` since ``Q(x, -n) = Q(f^{-n} x, n)``.
    """
    if horizon < 1:
        raise CocycleError("horizon must be >= 1")
    q, exhausted = bunching_sequence(g, metric, horizon, max_states)
    for n in range(1, len(q)):
        if q[n] < 1.0:
            theta = q[n] ** (1.0 / n)
            L = max(q[j] / theta ** j for j in range(n))
            return BunchingCertificate(L, theta, n, tuple(q[:n + 1]))
    reason = "state budget exhausted" if exhausted else "horizon exhausted"
    return NotCertified(tuple(q), reason)


@dataclass(frozen=True)
class ClosenessConstants:
    """Exact sup of ``|H - Id| / dist^beta`` over local stable/unstable pairs."""

    c_stable: float
    c_unstable: float

    @property
    def c(self) -> float:
        return max(self.c_stable, self.c_unstable)


def _pairs_with_alternatives(matrix: TransitionMatrix, length: int, lo: int,
                             alt_lo: int, alt_hi: int):
    """Words over ``[lo, lo+length)`` paired with rewrites of ``[alt_lo, alt_hi)``."""
    X = matrix.words(length)
    a, b = alt_lo - lo, alt_hi - lo
    alts = matrix.words(b - a)
    out_x, out_y = [], []
    for row in X:
        for alt in alts:
            if (alt == row[a:b]).all():
                continue
            y = row.copy()
            y[a:b] = alt
            if matrix.is_admissible(y):
                out_x.append(row)
                out_y.append(y)
    if not out_x:
        return np.zeros((0, length), np.int64), np.zeros((0, length), np.int64)
    return np.array(out_x), np.array(out_y)


def closeness_constants(g: Generator, metric: ShiftMetric = ShiftMetric()) -> ClosenessConstants:
    """Constants for ``|(A^n_y)^-1 A^n_x - Id| <= c dist(x, y)^beta``.

    Stable pairs share ``x_i = y_i`` for ``i >= 0``; for a depth-``r``
    generator the products agree from step ``r`` on, so only the window
    ``[-r, 2r)`` matters.  Unstable pairs use ``A^{-n}`` and the window
    ``[-2r+1, r)``.
    """
    r = g.depth
    nu, beta = metric.nu, g.beta
    I = np.eye(g.dim)
    c_s = 0.0
    if r >= 1:
        X, Y = _pairs_with_alternatives(g.matrix, 3 * r, -r, -r, 0)
        for x, y in zip(X, Y):
            ix, iy = g.indices(x), g.indices(y)
            Px, _ = K.chain_products(g.stack, g.inv_stack, ix)
            _, Qy = K.chain_products(g.stack, g.inv_stack, iy)
            H = np.matmul(Qy[1:], Px[1:])
            defect = K.spectral_norms(H - I).max()
            j = next(t for t in range(1, r + 1) if x[r - t] != y[r - t])
            c_s = max(c_s, float(defect / nu ** (beta * j)))
    c_u = 0.0
    if r >= 2:
        lo = -2 * r + 1
        X, Y = _pairs_with_alternatives(g.matrix, 3 * r - 1, lo, 1, r)
        for x, y in zip(X, Y):
            ix, iy = g.indices(x)[::-1], g.indices(y)[::-1]
            Px, _ = K.chain_products(g.inv_stack, g.stack, ix)
            _, Qy = K.chain_products(g.inv_stack, g.stack, iy)
            H = np.matmul(Qy[1:], Px[1:])
            defect = K.spectral_norms(H - I).max()
            j = next(t for t in range(1, r) if x[t - lo] != y[t - lo])
            c_u = max(c_u, float(defect / nu ** (beta * j)))
    return ClosenessConstants(c_s, c_u)


@dataclass(frozen=True)
class StableCloseness:
    sup_defect: float
    fitted_c: float
    defects: tuple
    increments: tuple
    rate_constant: float
    theta: float
    geometric: bool

    def __iter__(self):
        yield self.sup_defect
        yield self.fitted_c


def stable_closeness_defect(g: Generator, x: Point, y: Point, n_max: int = 40,
                            metric: ShiftMetric = ShiftMetric(), certificate=None):
    """Track ``|(A^n_y)^-1 A^n_x - Id|`` for ``n = 1 .. n_max``.

    ``y`` must lie in ``W^s_loc(x)`` and ``g`` must be fiber bunched.  The
    increments ``|H_{n+1} - H_n|`` are checked to decay at the certified
    rate ``theta``: the constant is fitted on the first ``r + 1`` steps and
    must bound every later step.
    """
    if certificate is None:
        certificate = certify_fiber_bunching(g, metric)
    if not certificate.certified:
        raise NotFiberBunchedError("generator is not certified fiber bunched")
    if not is_in_local_stable(x, y):
        raise CocycleError("y is not in the local stable set of x")
    from .sft import distance
    Px, _ = K.chain_products(g.stack, g.inv_stack, g.forward_indices(x, n_max))
    _, Qy = K.chain_products(g.stack, g.inv_stack, g.forward_indices(y, n_max))
    H = np.matmul(Qy, Px)
    I = np.eye(g.dim)
    defects = K.spectral_norms(H[1:] - I)
    inc = K.spectral_norms(H[1:] - H[:-1])
    theta = certificate.theta
    weights = theta ** np.arange(len(inc))
    head = min(len(inc), g.depth + 1)
    const = float((inc[:head] / weights[:head]).max()) if head else 0.0
    geometric = bool((inc <= const * weights * (1 + 1e-9) + 1e-13).all())
    sup = float(defects.max()) if len(defects) else 0.0
    dist = distance(x, y, metric)
    fitted = 0.0 if dist == 0.0 else sup / dist ** g.beta
    return StableCloseness(sup, fitted, tuple(defects.tolist()), tuple(inc.tolist()),
                           const, theta, geometric)


@dataclass(frozen=True)
class GrowthReport:
    s: float
    eps: float
    C_periodic: float
    premise_ok: bool
    C_prime: float
    conclusion_ok: bool
    empirical_exponent: float
    periodic_exponent: float

    @property
    def passed(self) -> bool:
        return self.premise_ok and self.conclusion_ok

    def to_dict(self) -> dict:
        return {"s": self.s, "eps": self.eps, "C_periodic": self.C_periodic,
                "premise_ok": self.premise_ok, "C_prime": self.C_prime,
                "conclusion_ok": self.conclusion_ok, "passed": self.passed,
                "empirical_exponent": self.empirical_exponent,
                "periodic_exponent": self.periodic_exponent}


def growth_exponent_check(g: Generator, s: float, eps: float, samples: Sequence[Point],
                          k_max: int = 8, horizon: int = 40) -> GrowthReport:
    """Empirical form of ``Q(p,k) <= C e^{sk}  =>  Q(x,n) <= C'_eps e^{(s+eps)|n|}``.

    Constants are fitted on the first half of each range at rate ``s`` and
    must then hold on the whole range at rate ``s + eps``, which makes both
    the premise and the conclusion falsifiable.
    """
    Qk = []
    for k in range(1, k_max + 1):
        P, Pi = g.cyclic_products(g.matrix.cyclic_words(k))
        Qk.append(float(distortions(P, Pi).max()))
    Qk = np.array(Qk)
    ks = np.arange(1, k_max + 1)
    half = max(1, (k_max + 1) // 2)
    C = float((Qk[:half] * np.exp(-s * ks[:half])).max())
    premise = bool((Qk <= C * np.exp((s + eps) * ks) * (1 + 1e-9)).all())
    ns = np.arange(-horizon, horizon + 1)
    Qn = np.ones((len(samples), len(ns)))
    for i, x in enumerate(samples):
        P, Pi = g.orbit_products(x, horizon)
        Qn[i] = distortions(P, Pi)
    Qmax = Qn.max(axis=0)
    inner = np.abs(ns) <= horizon // 2
    Cp = float((Qmax[inner] * np.exp(-s * np.abs(ns[inner]))).max())
    conclusion = bool((Qmax <= Cp * np.exp((s + eps) * np.abs(ns)) * (1 + 1e-9)).all())
    nz = ns != 0
    emp = float((np.log(Qmax[nz]) / np.abs(ns[nz])).max())
    per = float((np.log(Qk) / ks).max())
    return GrowthReport(s, eps, C, premise, Cp, conclusion, emp, per)
