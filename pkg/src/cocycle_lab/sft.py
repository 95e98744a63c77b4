"""Mixing subshifts of finite type.

Points of the shift space are eventually periodic bi-infinite sequences,
stored as a left period word, a finite core and a right period word.  This
class is closed under the shift, the bracket and periodic closing, and both
equality and the ultrametric ``nu ** n(x, y)`` are exactly decidable on it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class SFTError(ValueError):
    pass


class NotPrimitiveError(SFTError):
    pass


class InadmissibleError(SFTError):
    pass


class AlphabetMismatchError(SFTError):
    pass


class NoBracketError(SFTError):
    pass


class ClosingPreconditionError(SFTError):
    pass


class ClosingFailedError(SFTError):
    def __init__(self, junction):
        self.junction = junction
        super().__init__(f"cyclic junction {junction[0]} -> {junction[1]} is forbidden")


@dataclass(frozen=True)
class TransitionMatrix:
    """0/1 transition matrix of a mixing subshift.

    Construction fails unless some power ``M^N`` with ``N <= (k-1)^2 + 1`` is
    strictly positive and no symbol is stranded.
    """

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        k = len(rows)
        if k < 2 or any(len(r) != k for r in rows):
            raise SFTError(f"transition matrix must be square with k >= 2, got {k} rows")
        if any(v not in (0, 1) for r in rows for v in r):
            raise SFTError("transition matrix entries must be 0 or 1")
        a = self.array
        if (a.sum(axis=1) == 0).any() or (a.sum(axis=0) == 0).any():
            raise SFTError("every row and column needs at least one 1")
        if self.primitivity_exponent is None:
            raise NotPrimitiveError(
                f"no power M^N with N <= {(k - 1) ** 2 + 1} is positive")

    @classmethod
    def full_shift(cls, k: int = 2) -> "TransitionMatrix":
        return cls(tuple((1,) * k for _ in range(k)))

    @classmethod
    def golden_mean(cls) -> "TransitionMatrix":
        return cls(((1, 1), (1, 0)))

    @property
    def k(self) -> int:
        return len(self.entries)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.entries, dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def primitivity_exponent(self):
        k = self.k
        a = self.array.astype(bool)
        p = a.copy()
        for n in range(1, (k - 1) ** 2 + 2):
            if p.all():
                return n
            p = (p.astype(np.int64) @ a.astype(np.int64)) > 0
        return None

    def allowed(self, a: int, b: int) -> bool:
        return bool(self.entries[a][b])

    def successors(self, a: int) -> list:
        return [b for b in range(self.k) if self.entries[a][b]]

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not 0 <= s < self.k for s in word):
            return False
        return all(self.entries[word[i]][word[i + 1]] for i in range(len(word) - 1))

    def is_cyclic(self, word: Sequence[int]) -> bool:
        return (len(word) > 0 and self.is_admissible(word)
                and bool(self.entries[word[-1]][word[0]]))

    def trace_power(self, n: int) -> int:
        p = np.linalg.matrix_power(self.array.astype(object), n)
        return int(sum(p[i, i] for i in range(self.k)))

    def words(self, length: int) -> np.ndarray:
        """All admissible words of the given length, lexicographic order."""
        if length == 0:
            return np.zeros((1, 0), dtype=np.int64)
        w = np.arange(self.k, dtype=np.int64)[:, None]
        succ = [np.array(self.successors(a), dtype=np.int64) for a in range(self.k)]
        for _ in range(length - 1):
            last = w[:, -1]
            counts = np.array([len(succ[a]) for a in last])
            rep = np.repeat(w, counts, axis=0)
            nxt = np.concatenate([succ[a] for a in last])
            w = np.concatenate([rep, nxt[:, None]], axis=1)
        return w

    def cyclic_words(self, length: int) -> np.ndarray:
        """Words ``w`` with ``w`` admissible and ``w[-1] -> w[0]`` allowed."""
        w = self.words(length)
        keep = self.array[w[:, -1], w[:, 0]] == 1
        return w[keep]

    def shortest_path(self, a: int, b: int) -> list:
        """Symbols strictly between ``a`` and ``b`` on a shortest path of length >= 1.

        BFS explores successors in increasing order, so ties go to the
        smallest symbol.
        """
        parent = {}
        queue = deque()
        for s in self.successors(a):
            if s == b:
                return []
            if s not in parent:
                parent[s] = None
                queue.append(s)
        while queue:
            u = queue.popleft()
            for s in self.successors(u):
                if s == b:
                    path = [u]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return path[::-1]
                if s not in parent:
                    parent[s] = u
                    queue.append(s)
        raise SFTError(f"no path from {a} to {b}")  # unreachable for primitive M

    def to_list(self) -> list:
        return [list(r) for r in self.entries]


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            return word[:p]
    return word


def _least_rotation(word: tuple) -> int:
    return min(range(len(word)), key=lambda s: word[s:] + word[:s])


@dataclass(frozen=True, eq=False)
class Point:
    """Eventually periodic point ``... L L L core R R R ...``.

    ``core`` occupies coordinates ``lo .. lo + len(core) - 1``; coordinate
    ``lo - 1`` is ``left[-1]`` and coordinate ``lo + len(core)`` is
    ``right[0]``.  Fields are brought to canonical form on construction, so
    two points are equal iff their fields are equal.
    """

    matrix: TransitionMatrix
    left: tuple
    core: tuple
    lo: int
    right: tuple
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        left = tuple(int(s) for s in self.left)
        core = tuple(int(s) for s in self.core)
        right = tuple(int(s) for s in self.right)
        M = self.matrix
        if not left or not right:
            raise InadmissibleError("left and right periods must be non-empty")
        if not (M.is_cyclic(left) and M.is_cyclic(right) and M.is_admissible(core)):
            raise InadmissibleError(f"inadmissible point words {left} {core} {right}")
        first = core[0] if core else right[0]
        if not M.allowed(left[-1], first) or (core and not M.allowed(core[-1], right[0])):
            raise InadmissibleError(f"inadmissible junction in {left} {core} {right}")
        left, core, lo, right = self._canonical(_primitive_root(left), core,
                                                int(self.lo), _primitive_root(right))
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "_key", (M.entries, left, core, lo, right))

    @staticmethod
    def _canonical(left, core, lo, right):
        pl, pr = len(left), len(right)
        hi = lo + len(core)

        def at(n):
            if lo <= n < hi:
                return core[n - lo]
            if n >= hi:
                return right[(n - hi) % pr]
            return left[(n - lo) % pl]

        if pl == pr and all(at(n) == at(n + pl) for n in range(lo - pl, hi + pr)):
            w = tuple(at(n) for n in range(pl))
            s = _least_rotation(w)
            rot = w[s:] + w[:s]
            return rot, (), s, rot
        guard = len(core) + 4 * (pl + pr) + 8
        r0 = hi
        while at(r0 - 1) == at(r0 - 1 + pr):
            r0 -= 1
            if hi - r0 > guard:
                raise AssertionError("right period scan did not terminate")
        l0 = lo - 1
        while at(l0 + 1) == at(l0 + 1 - pl):
            l0 += 1
            if l0 - lo > guard:
                raise AssertionError("left period scan did not terminate")
        new_lo = min(l0 + 1, r0)
        return (tuple(at(n) for n in range(new_lo - pl, new_lo)),
                tuple(at(n) for n in range(new_lo, r0)),
                new_lo,
                tuple(at(n) for n in range(r0, r0 + pr)))

    # construction helpers
    @classmethod
    def periodic(cls, matrix: TransitionMatrix, word: Sequence[int]) -> "Point":
        """The point with ``x_{i} = word[i mod len(word)]``."""
        w = tuple(int(s) for s in word)
        return cls(matrix, w, (), 0, w)

    @classmethod
    def from_window(cls, matrix: TransitionMatrix, word: Sequence[int], lo: int = 0) -> "Point":
        """Extend a finite admissible word at ``[lo, lo + len)`` by shortest cycles."""
        word = tuple(int(s) for s in word)
        if not word or not matrix.is_admissible(word):
            raise InadmissibleError(f"inadmissible window {word}")
        t, s = word[0], word[-1]
        right = tuple(matrix.shortest_path(s, s)) + (s,)
        left = (t,) + tuple(matrix.shortest_path(t, t))
        # left is a cycle t -> ... -> t read forward, so left[-1] -> t is allowed
        return cls(matrix, left, word, lo, right)

    @classmethod
    def from_dict(cls, matrix: TransitionMatrix, data: dict) -> "Point":
        return cls(matrix, tuple(data["left"]), tuple(data["core"]),
                   int(data["core_lo"]), tuple(data["right"]))

    def to_dict(self) -> dict:
        return {"left": list(self.left), "core": list(self.core),
                "core_lo": self.lo, "right": list(self.right)}

    # structure
    def __eq__(self, other):
        return isinstance(other, Point) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        left = "".join(map(str, self.left))
        core = "".join(map(str, self.core))
        right = "".join(map(str, self.right))
        return f"Point(({left})^ {core}@{self.lo} ({right})^)"

    @property
    def hi(self) -> int:
        """First coordinate of the right periodic tail."""
        return self.lo + len(self.core)

    @property
    def is_periodic(self) -> bool:
        return not self.core and self.left == self.right

    @property
    def period(self):
        """Least period if the point is periodic, else ``None``."""
        return len(self.right) if self.is_periodic else None

    def __getitem__(self, n: int) -> int:
        n = int(n)
        if self.lo <= n < self.hi:
            return self.core[n - self.lo]
        if n >= self.hi:
            return self.right[(n - self.hi) % len(self.right)]
        return self.left[(n - self.lo) % len(self.left)]

    def window(self, a: int, b: int) -> np.ndarray:
        """Coordinates ``x_a, ..., x_{b-1}`` as an int array."""
        n = np.arange(a, b)
        out = np.empty(n.shape, dtype=np.int64)
        left = np.array(self.left, dtype=np.int64)
        right = np.array(self.right, dtype=np.int64)
        mid = (n >= self.lo) & (n < self.hi)
        hi_part = n >= self.hi
        lo_part = n < self.lo
        if mid.any():
            out[mid] = np.array(self.core, dtype=np.int64)[n[mid] - self.lo]
        out[hi_part] = right[(n[hi_part] - self.hi) % len(right)]
        out[lo_part] = left[(n[lo_part] - self.lo) % len(left)]
        return out


@dataclass(frozen=True)
class ShiftMetric:
    """``dist(x, y) = nu ** n(x, y)`` with ``n(x, y) = min{|i| : x_i != y_i}``."""

    nu: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")

    def __call__(self, x: Point, y: Point) -> float:
        return distance(x, y, self)


def _check_same(x: Point, y: Point):
    if x.matrix != y.matrix:
        raise AlphabetMismatchError("points live on different subshifts")


def _scan_radius(x: Point, y: Point) -> int:
    lcm = math.lcm(len(x.left), len(x.right), len(y.left), len(y.right))
    return max(abs(x.lo), abs(x.hi), abs(y.lo), abs(y.hi)) + lcm + 1


def agreement(x: Point, y: Point) -> float:
    """``n(x, y)``; ``math.inf`` when ``x == y``."""
    _check_same(x, y)
    if x == y:
        return math.inf
    B = _scan_radius(x, y)
    i = np.arange(B + 1)
    diff_pos = x.window(0, B + 1) != y.window(0, B + 1)
    diff_neg = (x.window(-B, 1) != y.window(-B, 1))[::-1]
    diff = diff_pos | diff_neg
    if not diff.any():
        raise AssertionError("distinct canonical points agree on the scan window")
    return int(i[diff][0])


def distance(x: Point, y: Point, metric: ShiftMetric = ShiftMetric()) -> float:
    n = agreement(x, y)
    return 0.0 if n == math.inf else metric.nu ** n


def shift(x: Point, n: int = 1) -> Point:
    """``f^n x``: coordinate ``j`` of the result is coordinate ``j + n`` of ``x``."""
    if n == 0:
        return x
    return Point(x.matrix, x.left, x.core, x.lo - int(n), x.right)


def periodic_points(matrix: TransitionMatrix, k: int) -> list:
    """All ``p`` with ``f^k p = p``; there are ``trace(M^k)`` of them."""
    if k < 1:
        raise ValueError("period must be >= 1")
    return [Point.periodic(matrix, w) for w in matrix.cyclic_words(k)]


def is_in_local_stable(x: Point, y: Point) -> bool:
    """``y`` agrees with ``x`` on every coordinate ``i >= 0``."""
    _check_same(x, y)
    lcm = math.lcm(len(x.right), len(y.right))
    b = max(x.hi, y.hi, 0) + lcm
    return bool((x.window(0, b) == y.window(0, b)).all())


def is_in_local_unstable(x: Point, y: Point) -> bool:
    """``y`` agrees with ``x`` on every coordinate ``i <= 0``."""
    _check_same(x, y)
    lcm = math.lcm(len(x.left), len(y.left))
    a = min(x.lo, y.lo, 0) - lcm
    return bool((x.window(a, 1) == y.window(a, 1)).all())


def bracket(x: Point, z: Point) -> Point:
    """The point of ``W^s_loc(x) & W^u_loc(z)``: future of ``x``, past of ``z``."""
    _check_same(x, z)
    if x[0] != z[0]:
        raise NoBracketError(f"x_0 = {x[0]} differs from z_0 = {z[0]}")
    a = min(z.lo, 0)
    b = max(x.hi, 0)
    left = z.window(a - len(z.left), a)
    core = np.concatenate([z.window(a, 0), x.window(0, b)])
    right = x.window(b, b + len(x.right))
    return Point(x.matrix, tuple(left), tuple(core), a, tuple(right))


@dataclass(frozen=True)
class ClosingCertificate:
    """Shadowing of ``x, ..., f^k x`` by the periodic orbit of ``p``.

    ``per_step_bounds[i]`` is the agreement radius ``n(f^i x, f^i p)``; the
    certified inequality is
    ``dist(f^i x, f^i p) <= D' dist(x, f^k x) gamma^min(i, k-i)``.
    """

    periodic_point: Point
    k: int
    D_prime: float
    gamma: float
    delta: float
    return_radius: float
    per_step_bounds: tuple

    @property
    def holds(self) -> bool:
        # with D' = 1 and gamma = nu the inequality is n_i >= N + min(i, k - i)
        N = self.return_radius
        return all(n_i >= N + min(i, self.k - i)
                   for i, n_i in enumerate(self.per_step_bounds))

    def to_dict(self) -> dict:
        def enc(v):
            return None if v == math.inf else int(v)
        return {"periodic_point": self.periodic_point.to_dict(), "k": self.k,
                "D_prime": self.D_prime, "gamma": self.gamma, "delta": self.delta,
                "return_radius": enc(self.return_radius),
                "per_step_bounds": [enc(v) for v in self.per_step_bounds]}


def close_orbit(x: Point, k: int, metric: ShiftMetric = ShiftMetric()) -> ClosingCertificate:
    """Close the orbit segment ``x .. f^k x`` by repeating ``x_0 .. x_{k-1}``.

    Requires ``dist(x, f^k x) <= nu``.  The resulting certificate uses
    ``D' = 1`` and ``gamma = nu``.
    """
    if k < 1:
        raise ClosingPreconditionError("k must be >= 1")
    fk = shift(x, k)
    N = agreement(x, fk)
    if N < 1:
        raise ClosingPreconditionError(
            f"dist(x, f^{k} x) = 1 > nu; the segment does not return")
    w = x.window(0, k)
    if not x.matrix.allowed(int(w[-1]), int(w[0])):
        raise ClosingFailedError((int(w[-1]), int(w[0])))
    p = Point.periodic(x.matrix, w)
    radii = tuple(agreement(shift(x, i), shift(p, i)) for i in range(k + 1))
    delta = 0.0 if N == math.inf else metric.nu ** N
    cert = ClosingCertificate(p, int(k), 1.0, metric.nu, delta, N, radii)
    if not cert.holds:
        raise AssertionError(f"closing bound violated for {x}, k={k}")
    return cert


def dense_orbit_segment(matrix: TransitionMatrix, depth: int):
    """A point ``z`` whose orbit window visits every admissible ``depth``-word.

    Returns ``(z, m)``: for every admissible word ``u`` of length ``depth``
    there is ``0 <= j <= m`` with ``z_j .. z_{j+depth-1} = u``.  The tour
    visits words in lexicographic order, joined by shortest connectors.
    """
    if depth <= 0:
        return Point.from_window(matrix, (0,), 0), 0
    words = [tuple(int(s) for s in w) for w in matrix.words(depth)]
    tour = list(words[0])
    covered = {words[0]}
    for w in words[1:]:
        if w in covered:
            continue
        start = len(tour)
        tour.extend(matrix.shortest_path(tour[-1], w[0]))
        tour.extend(w)
        for j in range(max(0, start - depth + 1), len(tour) - depth + 1):
            covered.add(tuple(tour[j:j + depth]))
    return Point.from_window(matrix, tour, 0), len(tour) - depth
