"""Periodic data, shadowing bounds, epsilon-nets and the boundedness verdict.

The shadowing checks follow the dense-orbit argument: a near return
``dist(w, f^k w) = delta <= delta0`` is closed to a periodic point ``p``, the
bracket ``y`` of ``p`` and ``w`` links the two, and two closeness estimates
``<= c delta^beta`` each cost at most a factor of 2 in distortion.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels as K
from .cocycle import (Generator, NotCertified, certify_fiber_bunching, closeness_constants,
                      distortions, evaluate)
from .linops import OperatorValue, distortion_ratio_bounds, gl_distance, op_norm
from .sft import (Point, ShiftMetric, agreement, bracket, close_orbit, dense_orbit_segment,
                  shift)

UNBOUNDED_C_PER = 1e6
UNBOUNDED_SLOPE = 0.05
UNBOUNDED_R2 = 0.9
RTOL = 1e-9


class AnalysisError(ValueError):
    pass


class NetRefusedError(AnalysisError):
    """The periodic data looks unbounded; no finite net is attempted."""


def _le(a: float, b: float) -> bool:
    return a <= b * (1 + RTOL) + 1e-12


# --- periodic data --------------------------------------------------------

@dataclass(frozen=True)
class PeriodicRecord:
    k: int
    word: tuple
    Q: float
    norm: float
    inv_norm: float
    dist_id: float

    def point(self, matrix) -> Point:
        return Point.periodic(matrix, self.word)


@dataclass
class PeriodicData:
    """Every ``A_p^k`` with ``f^k p = p`` and ``k <= k_max``.

    A period-``k`` word ``w`` stands for the point repeating ``w`` from
    coordinate 0, so a point of least period ``j | k`` appears once for each
    of its ``k`` rotations, matching ``trace(M^k)``.
    """

    k_max: int
    records: list
    products: np.ndarray
    inverses: np.ndarray
    ks: np.ndarray
    first_symbols: np.ndarray
    C_per: float
    C_prime_per: float
    per_k_C: list
    per_k_C_prime: list
    per_k_count: list
    witness: PeriodicRecord

    def to_dict(self) -> dict:
        return {"k_max": self.k_max, "C_per": self.C_per, "C_prime_per": self.C_prime_per,
                "per_k": [{"k": k + 1, "count": n, "C_per": c, "C_prime_per": cp}
                          for k, (n, c, cp) in enumerate(zip(self.per_k_count, self.per_k_C,
                                                             self.per_k_C_prime))],
                "witness": {"k": self.witness.k, "word": list(self.witness.word),
                            "Q": self.witness.Q}}

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "count", "C_per_k", "C_prime_per_k"])
        for k, (n, c, cp) in enumerate(zip(self.per_k_count, self.per_k_C, self.per_k_C_prime), 1):
            w.writerow([k, n, repr(c), repr(cp)])
        return buf.getvalue()


def collect_periodic_data(g: Generator, k_max: int) -> PeriodicData:
    if k_max < 1:
        raise AnalysisError("k_max must be >= 1")
    records, Ps, Pis, ks, firsts = [], [], [], [], []
    per_C, per_Cp, per_n = [], [], []
    I = np.eye(g.dim)
    for k in range(1, k_max + 1):
        words = g.matrix.cyclic_words(k)
        P, Pi = g.cyclic_products(words)
        nrm, inrm = K.spectral_norms(P), K.spectral_norms(Pi)
        Q = nrm * inrm
        did = K.gl_distances(P, Pi, I, I)
        for i, w in enumerate(words):
            records.append(PeriodicRecord(k, tuple(int(s) for s in w), float(Q[i]),
                                          float(nrm[i]), float(inrm[i]), float(did[i])))
        Ps.append(P)
        Pis.append(Pi)
        ks.append(np.full(len(words), k))
        firsts.append(words[:, 0])
        per_n.append(len(words))
        per_C.append(float(Q.max()))
        per_Cp.append(float(np.maximum(nrm, inrm).max()))
    witness = max(records, key=lambda r: r.Q)
    return PeriodicData(k_max, records, np.concatenate(Ps), np.concatenate(Pis),
                        np.concatenate(ks), np.concatenate(firsts), max(per_C), max(per_Cp),
                        per_C, per_Cp, per_n, witness)


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    r2: float
    unbounded: bool


def periodic_growth(pd: PeriodicData) -> GrowthFit:
    """Least-squares slope of ``log C_per(k)`` against ``k`` and the threshold rule."""
    y = np.log(np.maximum.accumulate(np.array(pd.per_k_C)))
    x = np.arange(1, len(y) + 1, dtype=float)
    if len(y) < 2:
        slope, r2 = 0.0, 0.0
    else:
        slope, icpt = np.polyfit(x, y, 1)
        ss_tot = float(((y - y.mean()) ** 2).sum())
        ss_res = float(((y - (slope * x + icpt)) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    unbounded = pd.C_per > UNBOUNDED_C_PER or (slope > UNBOUNDED_SLOPE and r2 > UNBOUNDED_R2)
    return GrowthFit(float(slope), float(r2), bool(unbounded))


# --- shadowing ------------------------------------------------------------

def shadowing_delta0(c: float, beta: float, metric: ShiftMetric) -> float:
    """Largest ``delta0 <= nu`` with ``(1 + c delta0^beta) / (1 - c delta0^beta) <= 2``."""
    if c <= 0:
        return metric.nu
    return min(metric.nu, (1.0 / (3.0 * c)) ** (1.0 / beta))


def _radius_for(delta0: float, metric: ShiftMetric) -> int:
    # smallest N >= 1 with nu^N <= delta0
    return max(1, math.ceil(math.log(delta0) / math.log(metric.nu) - 1e-12))


@dataclass(frozen=True)
class ShadowTrial:
    w: Point
    k: int
    n1: int


def shadowing_trials(matrix, n_trials: int, k_max: int, delta0: float,
                     metric: ShiftMetric = ShiftMetric(), seed: int = 0) -> list:
    """Near returns ``(w = f^{n1} z, k)`` of a dense orbit with ``dist(w, f^k w) <= delta0``."""
    N0 = _radius_for(delta0, metric)
    depth = max(2 * N0 + 1, 6)
    z, m = dense_orbit_segment(matrix, depth)
    cands = []
    for n1 in range(m + 1):
        w = shift(z, n1)
        for k in range(1, k_max + 1):
            if agreement(w, shift(w, k)) >= N0:
                cands.append((n1, k))
    if not cands:
        raise AnalysisError("no near returns found in the dense orbit window")
    rng = np.random.default_rng(seed)
    pick = sorted(rng.choice(len(cands), size=min(n_trials, len(cands)), replace=False))
    return [ShadowTrial(shift(z, cands[i][0]), cands[i][1], cands[i][0]) for i in pick]


@dataclass
class ShadowingReport:
    kind: str
    applicable: bool
    reason: str
    c: float
    delta0: float
    n_trials: int
    violations: int
    maxima: dict
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.applicable and self.violations == 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "applicable": self.applicable, "reason": self.reason,
                "ok": self.ok, "c": self.c, "delta0": self.delta0, "n_trials": self.n_trials,
                "violations": self.violations, "maxima": self.maxima}


def _shadow_quantities(g: Generator, trial: ShadowTrial, metric: ShiftMetric) -> dict:
    w, k = trial.w, trial.k
    cert = close_orbit(w, k, metric)
    p = cert.periodic_point
    y = bracket(p, w)
    Ap, Ay, Aw = evaluate(g, p, k), evaluate(g, y, k), evaluate(g, w, k)
    I = np.eye(g.dim)
    return {
        "delta": cert.delta, "p": p, "y": y, "Ap": Ap, "Ay": Ay, "Aw": Aw,
        # the two closeness estimates used by the proof
        "r1": op_norm(Ay.inverse @ Ap.matrix - I),
        "r1_swapped": op_norm(Ap.inverse @ Ay.matrix - I),
        "r2": op_norm(Aw.matrix @ Ay.inverse - I),
    }


def _prepare(g, pd, trials, n_trials, metric, seed, certificate, c):
    if certificate is None:
        certificate = certify_fiber_bunching(g, metric)
    if c is None:
        c = closeness_constants(g, metric).c
    delta0 = shadowing_delta0(c, g.beta, metric)
    if not certificate.certified:
        return None, c, delta0, "generator is not certified fiber bunched"
    if trials is None:
        trials = shadowing_trials(g.matrix, n_trials, pd.k_max, delta0, metric, seed)
    bad = [t for t in trials if t.k > pd.k_max]
    if bad:
        return None, c, delta0, f"trial period {bad[0].k} exceeds k_max = {pd.k_max}"
    N0 = _radius_for(delta0, metric)
    far = [t for t in trials if agreement(t.w, shift(t.w, t.k)) < N0]
    if far:
        return None, c, delta0, "trial return distance exceeds delta0"
    return trials, c, delta0, ""


def shadowing_distortion_check(g: Generator, pd: PeriodicData, trials=None, n_trials: int = 100,
                               metric: ShiftMetric = ShiftMetric(), seed: int = 0,
                               certificate=None, c: float | None = None) -> ShadowingReport:
    """``Q(y,k)/Q(p,k) <= 2``, ``Q(w,k)/Q(y,k) <= 2`` and ``Q(w,k) <= 4 Q(p,k) <= 4 C_per``."""
    trials, c, delta0, reason = _prepare(g, pd, trials, n_trials, metric, seed, certificate, c)
    if trials is None:
        return ShadowingReport("distortion", False, reason, c, delta0, 0, 0, {})
    viol, rows = 0, []
    mx = {"r1_over_bound": 0.0, "r2_over_bound": 0.0, "Qy_over_Qp": 0.0,
          "Qw_over_Qy": 0.0, "Qw_over_4Qp": 0.0, "Qw_over_4Cper": 0.0}
    for t in trials:
        q = _shadow_quantities(g, t, metric)
        bound = c * q["delta"] ** g.beta
        Qp, Qy, Qw = q["Ap"].Q, q["Ay"].Q, q["Aw"].Q
        ok_r = _le(q["r1"], bound) and _le(q["r2"], bound)
        step1 = distortion_ratio_bounds(q["Ay"], q["Ap"]) if min(q["r1"], q["r1_swapped"]) < 1 else None
        ok = (ok_r and step1 is not None and step1.ok and _le(Qy / Qp, 2.0)
              and _le(Qw / Qy, 2.0) and _le(Qw, 4 * Qp) and _le(4 * Qp, 4 * pd.C_per))
        viol += not ok
        for key, val in (("r1_over_bound", q["r1"] / bound if bound > 0 else (0.0 if q["r1"] < 1e-12 else math.inf)),
                         ("r2_over_bound", q["r2"] / bound if bound > 0 else (0.0 if q["r2"] < 1e-12 else math.inf)),
                         ("Qy_over_Qp", Qy / Qp), ("Qw_over_Qy", Qw / Qy),
                         ("Qw_over_4Qp", Qw / (4 * Qp)), ("Qw_over_4Cper", Qw / (4 * pd.C_per))):
            mx[key] = max(mx[key], float(val))
        rows.append({"n1": t.n1, "k": t.k, "delta": q["delta"], "Q_p": Qp, "Q_y": Qy,
                     "Q_w": Qw, "ok": bool(ok)})
    return ShadowingReport("distortion", True, "", c, delta0, len(trials), viol, mx, rows)


def shadowing_norm_check(g: Generator, pd: PeriodicData, trials=None, n_trials: int = 100,
                         metric: ShiftMetric = ShiftMetric(), seed: int = 0,
                         certificate=None, c: float | None = None) -> ShadowingReport:
    """``|A_y^k|, |(A_y^k)^-1| <= 2 C'_per`` and ``|A_w^k|, |(A_w^k)^-1| <= 4 C'_per``."""
    trials, c, delta0, reason = _prepare(g, pd, trials, n_trials, metric, seed, certificate, c)
    if trials is None:
        return ShadowingReport("norms", False, reason, c, delta0, 0, 0, {})
    Cp = pd.C_prime_per
    viol, rows = 0, []
    mx = {"Ay_over_2Cp": 0.0, "Ayinv_over_2Cp": 0.0, "Aw_over_4Cp": 0.0, "Awinv_over_4Cp": 0.0}
    for t in trials:
        q = _shadow_quantities(g, t, metric)
        bound = c * q["delta"] ** g.beta
        Ap, Ay, Aw = q["Ap"], q["Ay"], q["Aw"]
        chain = (_le(Ay.inv_op_norm, (1 + q["r1"]) * Ap.inv_op_norm)
                 and _le(Ay.op_norm, (1 + q["r1_swapped"]) * Ap.op_norm)
                 and _le(Aw.op_norm, (1 + q["r2"]) * Ay.op_norm)
                 and _le(max(q["r1"], q["r1_swapped"], q["r2"]), bound))
        finals = (_le(Ay.op_norm, 2 * Cp) and _le(Ay.inv_op_norm, 2 * Cp)
                  and _le(Aw.op_norm, 4 * Cp) and _le(Aw.inv_op_norm, 4 * Cp))
        ok = chain and finals
        viol += not ok
        mx["Ay_over_2Cp"] = max(mx["Ay_over_2Cp"], Ay.op_norm / (2 * Cp))
        mx["Ayinv_over_2Cp"] = max(mx["Ayinv_over_2Cp"], Ay.inv_op_norm / (2 * Cp))
        mx["Aw_over_4Cp"] = max(mx["Aw_over_4Cp"], Aw.op_norm / (4 * Cp))
        mx["Awinv_over_4Cp"] = max(mx["Awinv_over_4Cp"], Aw.inv_op_norm / (4 * Cp))
        rows.append({"n1": t.n1, "k": t.k, "norm_w": Aw.op_norm, "inv_norm_w": Aw.inv_op_norm,
                     "ok": bool(ok)})
    return ShadowingReport("norms", True, "", c, delta0, len(trials), viol, mx, rows)


# --- epsilon nets ---------------------------------------------------------

@dataclass
class EpsilonNet:
    """A finite net ``{P_i A_z^j}`` for ``{A_z^n}`` with coverage evidence.

    ``provenance[t] = (i, j)``: element ``t`` is ``P_i A_z^j`` where ``P_i``
    indexes ``periodic_net`` (``P_0 = Id``).  ``holdout_coverage`` is measured
    on ``A_z^n`` with ``m < |n| <= m + n_test``, outside the raw window.
    """

    eps: float
    elements: list
    provenance: list
    periodic_net: list
    M: float
    c: float
    delta0: float
    eps_prime: float
    m: int
    raw_size: int
    z: Point
    n_test: int
    max_distance: float
    coverage: float
    holdout_coverage: float
    propagation: dict

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def ok(self) -> bool:
        return (self.coverage == 1.0 and self.holdout_coverage == 1.0
                and self.propagation.get("violations", 0) == 0)

    def stack(self):
        return (np.stack([e.matrix for e in self.elements]),
                np.stack([e.inverse for e in self.elements]))

    def distance_to(self, P: np.ndarray, Pinv: np.ndarray) -> np.ndarray:
        S, Si = self.stack()
        return K.min_gl_distances(P, Pinv, S, Si)[0]

    def to_dict(self) -> dict:
        return {"eps": self.eps, "size": self.size, "periodic_net_size": len(self.periodic_net),
                "raw_size": self.raw_size, "M": self.M, "c": self.c, "delta0": self.delta0,
                "eps_prime": self.eps_prime, "m": self.m, "n_test": self.n_test,
                "max_distance": self.max_distance, "coverage": self.coverage,
                "holdout_coverage": self.holdout_coverage, "propagation": self.propagation, "ok": self.ok}


BUILD_FRACTION = 0.25
MAX_M = 1 << 15
THIN_FRACTION = 0.75


def _net_parameters(M: float, c: float, beta: float, eps_build: float, metric: ShiftMetric):
    # 4 M^2 c delta0^beta < eps_build / 2  and  4 M^2 c delta0^beta + M eps' < eps_build
    N0 = 1
    if c > 0:
        while 4 * M * M * c * metric.nu ** (N0 * beta) >= eps_build / 2:
            N0 += 1
    delta0 = metric.nu ** N0
    eps_prime = 0.99 * (eps_build - 4 * M * M * c * delta0 ** beta) / M
    return N0, delta0, eps_prime


def build_epsilon_net(g: Generator, eps: float, pd: PeriodicData, z: Point | None = None,
                      m: int | None = None, n_test: int = 1000,
                      metric: ShiftMetric = ShiftMetric(), min_m: int = 64,
                      n_propagation: int = 50, seed: int = 0, c: float | None = None) -> EpsilonNet:
    """Net construction from periodic data and a dense orbit, then verification.

    The raw set ``{P_i A_z^j}`` is built for ``eps/4`` with the closing
    constants; a farthest-point pass at ``3 eps / 4`` thins it, so the result
    is an ``eps``-net for every ``A_z^n`` the raw set covers.  Each ``P_i`` is
    paired only with ``A_z^j`` whose base symbol matches the periodic point,
    which is the only pairing the closing argument uses.

    Coverage is measured on ``|n| <= n_test`` and, held out, on
    ``m < |n| <= m + n_test``.  Unless ``m`` is given, ``m`` doubles up to
    ``MAX_M`` until both are complete.
    """
    if eps <= 0:
        raise AnalysisError("eps must be positive")
    fit = periodic_growth(pd)
    if fit.unbounded:
        raise NetRefusedError(f"periodic data looks unbounded: C_per = {pd.C_per:.4g}, "
                              f"slope = {fit.slope:.4g}, R^2 = {fit.r2:.4g}")
    if c is None:
        c = closeness_constants(g, metric).c
    eps_b = BUILD_FRACTION * eps
    M = max(pd.C_prime_per, 1.0)
    for _ in range(6):
        N0, delta0, eps_prime = _net_parameters(M, c, g.beta, eps_b, metric)
        if z is None:
            zz, m_tour = dense_orbit_segment(g.matrix, 2 * N0 - 1)
            m_dense = m_tour + N0 - 1
        else:
            zz, m_dense = z, 0
        mm = m if m is not None else max(m_dense, min_m)
        span = mm + n_test
        P, Pi = g.orbit_products(zz, span)
        M_obs = max(M, float(K.spectral_norms(P).max()), float(K.spectral_norms(Pi).max()))
        if M_obs <= M * (1 + 1e-12):
            break
        M = M_obs
    z = zz
    I = np.eye(g.dim)[None]
    # periodic net per base symbol, P_0 = Id first
    allP = np.concatenate([pd.products, pd.inverses])
    allPi = np.concatenate([pd.inverses, pd.products])
    sym = np.concatenate([pd.first_symbols, pd.first_symbols])
    periodic_net, part = [I[0]], {}
    per_inv = [I[0]]
    for a in range(g.matrix.k):
        sel = np.flatnonzero(sym == a)
        S = np.concatenate([I, allP[sel]])
        Si = np.concatenate([I, allPi[sel]])
        keep = K.farthest_point_net(S, Si, eps_prime)
        ids = [0]
        for t in keep[1:]:
            ids.append(len(periodic_net))
            periodic_net.append(S[t])
            per_inv.append(Si[t])
        part[a] = ids
    PN = np.stack(periodic_net)
    PNi = np.stack(per_inv)
    while True:
        span = mm + n_test
        P, Pi = g.orbit_products(z, span)
        S, Si, prov, raw_size = _thinned_net(z, mm, span, P, Pi, PN, PNi, part, eps)
        # coverage of A_z^n for |n| <= n_test, and held out beyond the window |j| <= m
        lo = span - n_test
        dmin, _ = K.min_gl_distances(P[lo:lo + 2 * n_test + 1], Pi[lo:lo + 2 * n_test + 1], S, Si)
        coverage = float((dmin <= eps * (1 + 1e-12)).mean())
        out = np.r_[0:n_test, span + mm + 1:2 * span + 1]
        dout, _ = K.min_gl_distances(P[out], Pi[out], S, Si)
        holdout = float((dout <= eps * (1 + 1e-12)).mean())
        if m is not None or (coverage == 1.0 and holdout == 1.0) or 2 * mm > MAX_M:
            break
        mm *= 2
    M = max(M, float(K.spectral_norms(P).max()), float(K.spectral_norms(Pi).max()))
    elements = [OperatorValue(S[t], Si[t]) for t in range(len(S))]
    prop = _propagation_checks(g, z, mm, n_test, N0, M, c, PN, PNi, part, S, Si,
                               P, Pi, span, metric, n_propagation, seed)
    return EpsilonNet(eps, elements, prov, [OperatorValue(a, b) for a, b in zip(PN, PNi)],
                      M, c, delta0, eps_prime, mm, raw_size, z, n_test,
                      float(max(dmin.max(), dout.max())), coverage, holdout, prop)


def _thinned_net(z, mm, span, P, Pi, PN, PNi, part, eps):
    """Raw set ``{P_i A_z^j : |j| <= mm}`` thinned at ``3 eps / 4``."""
    # j = 0 first so that Id seeds the thinning
    js = [0] + [j for j in range(-mm, mm + 1) if j != 0]
    raw, rawi, prov = [], [], []
    for j in js:
        Aj, Aji = P[span + j], Pi[span + j]
        ids = part[int(z[j])]
        raw.append(PN[ids] @ Aj)
        rawi.append(Aji @ PNi[ids])
        prov.extend((i, j) for i in ids)
    raw = np.concatenate(raw)
    rawi = np.concatenate(rawi)
    keep = K.farthest_point_net(raw, rawi, THIN_FRACTION * eps)
    return raw[keep], rawi[keep], [prov[t] for t in keep], len(raw)


PROPAGATION_MAX_PERIOD = 256


def _propagation_checks(g, z, m, n_test, N0, M, c, PN, PNi, part, S, Si, P, Pi, span,
                        metric, n_trials, seed) -> dict:
    """Per-trial form of ``d(A_z^n, P_i A_z^j) <= M (c' delta^beta + eps')``.

    For each sampled ``n`` the return ``j`` is the nearest window index whose
    central block of ``2 N0 - 1`` symbols matches that of ``n``; trials whose
    return time exceeds ``PROPAGATION_MAX_PERIOD`` are skipped.
    """
    rng = np.random.default_rng(seed)
    pool = [n for n in range(-n_test, n_test + 1) if n != 0]
    picks = sorted(rng.choice(len(pool), size=min(n_trials, len(pool)), replace=False))
    cprime = 4 * M * c
    viol, worst, done, skipped = 0, 0.0, 0, 0
    origin = span + N0
    orbit = np.asarray(z.window(-span - N0, span + N0 + 1))
    blocks: dict = {}
    for j in range(-m, m + 1):
        blocks.setdefault(orbit[origin + j - N0 + 1:origin + j + N0].tobytes(), []).append(j)
    for t in picks:
        n = pool[t]
        cands = [j for j in blocks.get(orbit[origin + n - N0 + 1:origin + n + N0].tobytes(), [])
                 if j != n and abs(n - j) <= PROPAGATION_MAX_PERIOD]
        if not cands:
            skipped += 1
            continue
        j = min(cands, key=lambda j: (abs(n - j), j))
        a = _agree(orbit, origin, n, j, N0 + 40)
        k = n - j
        if k > 0:
            x, kk = shift(z, j), k
        else:
            x, kk = shift(z, n), -k
        p = close_orbit(x, kk, metric).periodic_point
        Ax, Apk = evaluate(g, x, kk), evaluate(g, p, kk)
        delta = metric.nu ** min(a, agreement(x, shift(x, kk)))
        d1 = gl_distance(Apk, Ax)
        target = (Apk.matrix, Apk.inverse) if k > 0 else (Apk.inverse, Apk.matrix)
        ids = part[int(z[j])]
        dd = K.gl_distances(PN[ids], PNi[ids], target[0], target[1])
        i_best = ids[int(np.argmin(dd))]
        eps_act = float(dd.min())
        Pn = OperatorValue(P[span + n], Pi[span + n])
        cand = OperatorValue(PN[i_best] @ P[span + j], Pi[span + j] @ PNi[i_best])
        lhs = gl_distance(Pn, cand)
        rhs = M * (cprime * delta ** g.beta + eps_act)
        ok = _le(d1, cprime * delta ** g.beta) and _le(lhs, rhs)
        viol += not ok
        # same absolute slack as _le
        worst = max(worst, lhs / max(rhs, 1e-12))
        done += 1
    return {"trials": done, "skipped": skipped, "violations": viol, "max_lhs_over_rhs": worst}


def _agree(orbit: np.ndarray, origin: int, n: int, j: int, cap: int) -> int:
    """Agreement radius of ``f^n z`` and ``f^j z`` read from a precomputed window."""
    for r in range(cap):
        for s in ((r,) if r == 0 else (r, -r)):
            a, b = origin + n + s, origin + j + s
            if not (0 <= a < len(orbit) and 0 <= b < len(orbit)):
                return r
            if orbit[a] != orbit[b]:
                return r
    return cap


# --- verdict --------------------------------------------------------------

class Verdict(str, Enum):
    UNBOUNDED = "UNBOUNDED"
    BOUNDED_EVIDENCE = "BOUNDED_EVIDENCE"
    PRECOMPACT_EVIDENCE = "PRECOMPACT_EVIDENCE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Budget:
    k_max: int = 10
    horizon: int = 20
    n_trials: int = 100
    eps: tuple = (0.2, 0.1)
    n_test: int = 1000
    min_m: int = 64
    seed: int = 0
    nets: bool = True


@dataclass
class VerdictReport:
    verdict: Verdict
    stage: str
    evidence: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "stage": self.stage, "evidence": self.evidence}


def verdict(g: Generator, budget: Budget = Budget(),
            metric: ShiftMetric = ShiftMetric(), pd: PeriodicData | None = None) -> VerdictReport:
    """Staged evidence for boundedness and precompactness of the cocycle values.

    ``pd`` may be passed in when it was already collected with ``budget.k_max``.
    """
    ev: dict = {}
    if pd is None or pd.k_max != budget.k_max:
        pd = collect_periodic_data(g, budget.k_max)
    fit = periodic_growth(pd)
    ev["periodic"] = {**pd.to_dict(), "slope": fit.slope, "r2": fit.r2}
    if fit.unbounded:
        return VerdictReport(Verdict.UNBOUNDED, "periodic", ev)
    cert = certify_fiber_bunching(g, metric, budget.horizon)
    ev["bunching"] = cert.to_dict()
    if isinstance(cert, NotCertified):
        return VerdictReport(Verdict.INCONCLUSIVE, "bunching", ev)
    c = closeness_constants(g, metric).c
    ev["closeness_c"] = c
    sd = shadowing_distortion_check(g, pd, n_trials=budget.n_trials, metric=metric,
                                    seed=budget.seed, certificate=cert, c=c)
    sn = shadowing_norm_check(g, pd, n_trials=budget.n_trials, metric=metric,
                              seed=budget.seed, certificate=cert, c=c)
    ev["shadowing_distortion"] = sd.to_dict()
    ev["shadowing_norms"] = sn.to_dict()
    if not (sd.ok and sn.ok):
        return VerdictReport(Verdict.INCONCLUSIVE, "shadowing", ev)
    if not budget.nets:
        return VerdictReport(Verdict.BOUNDED_EVIDENCE, "shadowing", ev)
    nets = []
    for e in budget.eps:
        try:
            net = build_epsilon_net(g, e, pd, n_test=budget.n_test, metric=metric,
                                    min_m=budget.min_m, seed=budget.seed, c=c)
        except NetRefusedError as exc:
            ev["nets"] = {"refused": str(exc)}
            return VerdictReport(Verdict.BOUNDED_EVIDENCE, "nets", ev)
        nets.append(net)
    ev["nets"] = [n.to_dict() for n in nets]
    if all(n.ok for n in nets):
        return VerdictReport(Verdict.PRECOMPACT_EVIDENCE, "nets", ev)
    return VerdictReport(Verdict.BOUNDED_EVIDENCE, "nets", ev)
