"""Invariant norm families ``phi_x = sup_n (A_x^n)* phi0`` built by truncation.

``phi_x^m`` is the maximum of the pullbacks of the Euclidean norm along the
orbit window ``|n| <= m``.  Iteration stops once the residual
``dist(phi^{m-1}, phi^m)`` stays below ``tol`` for three consecutive steps.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels as K
from .cocycle import Generator, closeness_constants
from .normspace import EXACT_MARGIN, Interval, NormRep, _polar, norm_distance, pullback
from .sft import (NoBracketError, Point, ShiftMetric, bracket, distance,
                  is_in_local_stable, is_in_local_unstable, periodic_points, shift)

CONSECUTIVE_PASSES = 3


class FamilyError(ValueError):
    pass


def partial_norm(g: Generator, x: Point, m: int) -> NormRep:
    """``phi_x^m = max { (A_x^n)* phi0 : |n| <= m }``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return NormRep.euclidean(g.dim)
    P, _ = g.orbit_products(x, m)
    return NormRep(P)


def _growth_residual(old: NormRep, new_gens: np.ndarray) -> Interval:
    """Enclosure of ``dist(old, max(old, new))`` with ``new_gens`` already polar."""
    # only the added generators can raise the ratio
    if old.dim == 2:
        f_new = NormRep(new_gens, prune=False, _normalized=True).quadratic_forms()
        s = K.sup_ratio_2d(f_new, old.quadratic_forms())
        val = 0.5 * math.log(max(s, 1.0))
        if val == 0.0:
            return Interval(0.0, 0.0)
        # the candidate angle attains val, so it is also a lower bound up to rounding
        return Interval(max(0.0, val - 1e-12), val + EXACT_MARGIN)
    new = NormRep(np.concatenate([old.generators, new_gens]), _normalized=True)
    return norm_distance(old, new)


@dataclass
class InvariantNormResult:
    norm: NormRep
    converged: bool
    trace: list
    convergence_m: int | None
    diverged: bool
    m: int

    def __iter__(self) -> Iterator:
        yield self.norm
        yield self.converged
        yield self.trace


def invariant_norm(g: Generator, x: Point, tol: float = 1e-6, m_max: int = 60) -> InvariantNormResult:
    """Iterate ``phi_x^m`` until the residual is below ``tol`` three times in a row.

    ``trace[m-1]`` encloses ``dist(phi^{m-1}, phi^m)``.  ``convergence_m`` is
    the first ``m`` of the passing run.  ``diverged`` marks a run that never
    converged and whose late residuals never fell below half the early
    maximum.
    """
    if tol <= 0 or m_max < 1:
        raise ValueError("need tol > 0 and m_max >= 1")
    P, _ = g.orbit_products(x, m_max)
    S = _polar(P)
    c = m_max
    phi = NormRep.euclidean(g.dim)
    trace: list = []
    run = 0
    conv_m = None
    m = 0
    for m in range(1, m_max + 1):
        new = S[[c - m, c + m]]
        r = _growth_residual(phi, new)
        phi = NormRep(np.concatenate([phi.generators, new]), _normalized=True)
        trace.append(r)
        if r.hi < tol:
            run += 1
            if run == CONSECUTIVE_PASSES:
                conv_m = m - CONSECUTIVE_PASSES + 1
                break
        else:
            run = 0
    converged = conv_m is not None
    diverged = False
    if not converged and len(trace) >= 4:
        his = [t.hi for t in trace]
        half = len(his) // 2
        diverged = min(his[half:]) >= 0.5 * max(his[:half])
    return InvariantNormResult(phi, converged, trace, conv_m, diverged, m)


def _key(x: Point) -> str:
    return json.dumps(x.to_dict(), sort_keys=True)


@dataclass
class NormFamily:
    """Truncated invariant norms on the period-``L`` points plus bracket points.

    ``base_points`` is closed under the shift, so the isometry defect can be
    checked at every one of them.  ``aux_points`` are brackets of base
    points, stored only to supply local stable and unstable pairs.
    """

    L: int
    tol: float
    m_max: int
    base_points: list
    aux_points: list
    norms: dict
    results: dict
    K: float
    convergence_m: int | None
    converged: bool
    diverged: bool
    residual: Interval

    def norm(self, x: Point) -> NormRep:
        try:
            return self.norms[x]
        except KeyError:
            raise FamilyError(f"point {x} is not stored in the family") from None

    @property
    def points(self) -> list:
        return self.base_points + self.aux_points

    def to_dict(self) -> dict:
        base = {"".join(str(int(s)) for s in x.window(0, self.L)): self.norms[x].to_dict()
                for x in self.base_points}
        aux = [{"point": x.to_dict(), "norm": self.norms[x].to_dict()} for x in self.aux_points]
        return {"L": self.L, "tol": self.tol, "m_max": self.m_max, "K": self.K,
                "converged": self.converged, "diverged": self.diverged,
                "convergence_m": self.convergence_m, "residual": self.residual.to_dict(),
                "norms": dict(sorted(base.items())), "auxiliary": aux}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def traces_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point", "m", "residual_lo", "residual_hi"])
        for x in self.points:
            name = "".join(str(int(s)) for s in x.window(0, self.L)) if x in self.base_points \
                else _key(x)
            for m, r in enumerate(self.results[x].trace, start=1):
                w.writerow([name, m, repr(r.lo), repr(r.hi)])
        return buf.getvalue()


def _bracket_points(base: list, limit: int) -> list:
    seen = set(base)
    out = []
    for x in base:
        for z in base:
            if x is z:
                continue
            try:
                y = bracket(x, z)
            except NoBracketError:
                continue
            if y not in seen:
                seen.add(y)
                out.append(y)
                if len(out) >= limit:
                    return out
    return out


def build_family(g: Generator, L: int = 6, tol: float = 1e-6, m_max: int = 60,
                 max_aux: int = 32) -> NormFamily:
    """Invariant norms on every period-``L`` point and up to ``max_aux`` brackets."""
    base = periodic_points(g.matrix, L)
    aux = _bracket_points(base, max_aux)
    norms, results = {}, {}
    K_obs = 1.0
    for x in base + aux:
        res = invariant_norm(g, x, tol, m_max)
        results[x] = res
        norms[x] = res.norm
        K_obs = max(K_obs, res.norm.K)
        P, Pi = g.orbit_products(x, res.m)
        K_obs = max(K_obs, float(K.spectral_norms(P).max()), float(K.spectral_norms(Pi).max()))
    conv = all(r.converged for r in results.values())
    div = any(r.diverged for r in results.values())
    ms = [r.convergence_m for r in results.values() if r.convergence_m is not None]
    last = [r.trace[-1] for r in results.values()]
    residual = Interval(max(t.lo for t in last), max(t.hi for t in last))
    return NormFamily(L, tol, m_max, base, aux, norms, results, K_obs,
                      max(ms) if conv else None, conv, div, residual)


def isometry_defect(g: Generator, family: NormFamily, x: Point) -> Interval:
    """``dist(phi_x, A(x)* phi_{fx})``."""
    phi_x = family.norm(x)
    phi_fx = family.norm(shift(x, 1))
    return norm_distance(phi_x, pullback(g.value(x), phi_fx))


@dataclass(frozen=True)
class HolderProfile:
    fitted_c1: float
    bound: float
    bound_ratio: float
    c: float
    K: float
    pairs: int
    ok: bool
    worst_pair: tuple = field(default=())

    def __iter__(self):
        yield self.fitted_c1
        yield self.bound_ratio

    def to_dict(self) -> dict:
        return {"fitted_c1": self.fitted_c1, "bound": self.bound,
                "bound_ratio": self.bound_ratio, "c": self.c, "K": self.K,
                "pairs": self.pairs, "ok": self.ok}


def holder_profile(g: Generator, family: NormFamily,
                   metric: ShiftMetric = ShiftMetric(), c: float | None = None) -> HolderProfile:
    """Largest ``dist(phi_x, phi_z) / dist(x, z)^beta`` over stored local pairs.

    Compared against ``K^10 c`` with ``c`` the stable/unstable closeness
    constant.  Truncation slack of ``3 tol`` is granted to each distance.
    """
    if c is None:
        c = closeness_constants(g, metric).c
    pts = family.points
    best, worst, n_pairs = 0.0, (), 0
    slack = 3 * family.tol
    slack_best = 0.0
    for i, x in enumerate(pts):
        for z in pts[i + 1:]:
            if not (is_in_local_stable(x, z) or is_in_local_unstable(x, z)):
                continue
            n_pairs += 1
            dxz = distance(x, z, metric) ** g.beta
            d = norm_distance(family.norms[x], family.norms[z]).lo
            if d / dxz > best:
                best, worst = d / dxz, (x, z)
            slack_best = max(slack_best, max(0.0, d - slack) / dxz)
    if n_pairs == 0:
        raise FamilyError("no local stable or unstable pairs among stored points")
    bound = family.K ** 10 * c
    ratio = best / bound if bound > 0 else (0.0 if best == 0 else math.inf)
    ok = slack_best <= bound * (1 + 1e-9)
    return HolderProfile(best, bound, ratio, c, family.K, n_pairs, ok, worst)
