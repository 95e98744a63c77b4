"""Acceptance criteria 1-10, one test per criterion.

Each test prints (and records for the terminal summary) a single
``criterion N: PASS|FAIL`` line with the measured quantities.
"""

import json
import math
from pathlib import Path

import numpy as np

from cocycle_lab import config
from cocycle_lab.analysis import (Budget, Verdict, build_epsilon_net, collect_periodic_data,
                                  shadowing_delta0, shadowing_distortion_check,
                                  shadowing_norm_check, shadowing_trials, verdict)
from cocycle_lab.cli import main
from cocycle_lab.cocycle import (Generator, NotCertified, certify_fiber_bunching,
                                 closeness_constants, distortions, evaluate)
from cocycle_lab.invariant import build_family, holder_profile, invariant_norm, isometry_defect
from cocycle_lab.linops import (LinopsError, NotApplicableError, OperatorValue,
                                composition_distance_bound, distortion_ratio_bounds,
                                quasiconformal)
from cocycle_lab.normspace import (NormRep, check_max_inequality, check_metric_equivalence,
                                   check_pullback_lipschitz, norm_distance, pullback)
from cocycle_lab.sft import Point, ShiftMetric, close_orbit, periodic_points, shift

from conftest import ACCEPTANCE_LINES
from cocycles import (C_TABLE, CONSTANT_C, GOLDEN, TEST_MATRICES, circle_net_size,
                      constant_conjugacy, dense_ratio_2d, diag, direct_product, directions,
                      grid_values, log_ratio, random_generator, random_point, rotation_conjugacy,
                      theta_grid_values)

METRIC = ShiftMetric(0.5)
DATA = Path(config.__file__).parent / "data"


def record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def rel_err(A, B):
    return float(np.linalg.norm(A - B, 2) / max(np.linalg.norm(B, 2), 1e-300))


def rand_matrix(rng, d, spread=0.5, cond=10):
    while True:
        A = np.eye(d) + spread * rng.normal(size=(d, d))
        if np.linalg.cond(A) < cond:
            return A


def test_criterion_1_cocycle_algebra():
    rng = np.random.default_rng(101)
    worst_eq = worst_inv = 0.0
    for t in range(1000):
        M = TEST_MATRICES[t % len(TEST_MATRICES)]
        g = random_generator(rng, M, spread=0.3)
        x = random_point(rng, M, 10)
        n, k = (int(v) for v in rng.integers(-12, 13, size=2))
        lhs = evaluate(g, x, n + k).matrix
        rhs = evaluate(g, shift(x, k), n).matrix @ evaluate(g, x, k).matrix
        worst_eq = max(worst_eq, rel_err(lhs, rhs))
        An = evaluate(g, x, n).matrix
        back = evaluate(g, shift(x, n), -n).matrix
        worst_inv = max(worst_inv, rel_err(back, np.linalg.inv(An)))
        # the library matches the direct left-to-right product
        worst_eq = max(worst_eq, rel_err(An, direct_product(g, x, n)))
    ok = worst_eq <= 1e-9 and worst_inv <= 1e-9
    record(1, ok, f"1000 instances, max rel err: equation {worst_eq:.2e}, "
                  f"inverse {worst_inv:.2e} (tol 1e-9)")


def test_criterion_2_coboundary_telescoping():
    rng = np.random.default_rng(102)
    worst, products = 0.0, 0
    for t in range(50):
        M = TEST_MATRICES[t % 3]
        depth, dim = t % 2, 1 + t % 4
        table = {tuple(int(s) for s in w): rand_matrix(rng, dim, 0.4, 20)
                 for w in M.words(2 * depth + 1)}
        g = Generator.coboundary(M, depth, table)
        pd = collect_periodic_data(g, 8)
        # d(A, Id) = |A - Id| + |A^-1 - Id|
        worst = max(worst, max(r.dist_id for r in pd.records))
        products += len(pd.records)
        for rec in pd.records[::97]:
            A = direct_product(g, rec.point(M), rec.k)
            worst = max(worst, float(np.linalg.norm(A - np.eye(dim), 2)))
    record(2, worst <= 1e-9, f"50 C-tables, {products} periodic products, "
                             f"max d(A_p^k, Id) {worst:.2e} (tol 1e-9)")


def test_criterion_3_lemma_suites():
    rng = np.random.default_rng(103)
    fails = {}
    # distortion ratio bounds
    bad = 0
    for t in range(10_000):
        d = 1 + t % 4
        A = rand_matrix(rng, d)
        B = A @ (np.eye(d) + rng.uniform(0.01, 0.6) * rng.normal(size=(d, d)) / math.sqrt(d))
        try:
            bad += not distortion_ratio_bounds(A, B).ok
        except (NotApplicableError, LinopsError):
            B = A @ (np.eye(d) + 0.01 * np.diag(rng.uniform(-1, 1, d)))
            bad += not distortion_ratio_bounds(A, B).ok
    fails["distortion"] = bad
    # composition bound
    bad = 0
    for t in range(10_000):
        d = 1 + t % 4
        ops = [OperatorValue(rand_matrix(rng, d, 0.3)) for _ in range(4)]
        Mb = max(max(X.op_norm, X.inv_op_norm) for X in ops)
        bad += not composition_distance_bound(*ops, Mb).ok
    fails["composition"] = bad
    # metric equivalence, pullback Lipschitz, max of norms
    bad_eq = bad_pb = bad_max = 0
    for t in range(1000):
        a = NormRep([rand_matrix(rng, 2) for _ in range(1 + t % 3)])
        b = NormRep([rand_matrix(rng, 2) for _ in range(1 + (t // 3) % 3)])
        bad_eq += not check_metric_equivalence(a, b, max(a.K, b.K)).ok
        d = 2 + t % 2
        phi = NormRep([rand_matrix(rng, d, 0.3) for _ in range(1 + t % 3)])
        A, At = rand_matrix(rng, d, 0.3), rand_matrix(rng, d, 0.3)
        Kb = max(phi.K, pullback(A, phi).K, pullback(At, phi).K)
        bad_pb += not check_pullback_lipschitz(A, At, phi, Kb).ok
        ps = [NormRep([rand_matrix(rng, 2)]) for _ in range(3)]
        qs = [NormRep([rand_matrix(rng, 2)]) for _ in range(3)]
        bad_max += not check_max_inequality(ps, qs).ok
    fails.update(metric_equivalence=bad_eq, pullback=bad_pb, max_norms=bad_max)
    record(3, not any(fails.values()),
           "violations " + ", ".join(f"{k} {v}" for k, v in fails.items())
           + " (1e4 / 1e4 / 1e3 / 1e3 / 1e3 trials)")


def _independent_agreement(x, y, radius):
    for n in range(radius + 1):
        if x[n] != y[n] or x[-n] != y[-n]:
            return n
    return math.inf


def test_criterion_4_closing_lemma():
    checked = failures = 0
    for k in range(1, 9):
        for depth in range(0, 5):
            for w in GOLDEN.words(k + 2 * depth + 1):
                x = Point.from_window(GOLDEN, w, -depth)
                fk = shift(x, k)
                R = 4 * (k + depth) + 16
                N = _independent_agreement(x, fk, R)
                if N < 1:
                    continue
                cert = close_orbit(x, k, METRIC)
                p = cert.periodic_point
                ok = cert.D_prime == 1.0 and cert.gamma == METRIC.nu
                ok &= all(p[j] == x[j % k] for j in range(-2 * k, 2 * k))
                for i in range(k + 1):
                    n_i = _independent_agreement(shift(x, i), shift(p, i), R + k)
                    ok &= n_i == cert.per_step_bounds[i]
                    # dist(f^i x, f^i p) <= D' dist(x, f^k x) gamma^min(i, k-i)
                    lhs = 0.0 if n_i == math.inf else METRIC.nu ** n_i
                    rhs = (0.0 if N == math.inf else METRIC.nu ** N) * METRIC.nu ** min(i, k - i)
                    ok &= lhs <= rhs
                checked += 1
                failures += not ok
    record(4, failures == 0 and checked > 0,
           f"{checked} pseudo-periodic segments (k <= 8, depth <= 4), {failures} failures")


def test_criterion_5_shadowing_constants():
    g = rotation_conjugacy()
    assert all(max(np.linalg.norm(C, 2), np.linalg.norm(np.linalg.inv(C), 2)) <= 1.5
               for C in C_TABLE.values())
    pd = collect_periodic_data(g, 10)
    sd = shadowing_distortion_check(g, pd, n_trials=100, metric=METRIC)
    sn = shadowing_norm_check(g, pd, n_trials=100, metric=METRIC)
    d0 = shadowing_delta0(closeness_constants(g, METRIC).c, g.beta, METRIC)
    direct_bad = 0
    for t in shadowing_trials(GOLDEN, 100, 10, d0, METRIC, seed=0):
        A = evaluate(g, t.w, t.k)
        direct_bad += not (A.Q <= 4 * pd.C_per and A.op_norm <= 4 * pd.C_prime_per
                           and A.inv_op_norm <= 4 * pd.C_prime_per)
    rng = np.random.default_rng(105)
    sup_Q = 0.0
    for _ in range(300):
        P, Pi = g.orbit_products(random_point(rng, GOLDEN, 20), 40)
        sup_Q = max(sup_Q, float(distortions(P, Pi).max()))
    QC2 = max(quasiconformal(C) for C in C_TABLE.values()) ** 2
    ok = (sd.ok and sn.ok and sd.n_trials == sn.n_trials == 100 and direct_bad == 0
          and sup_Q <= QC2 + 1e-6)
    record(5, ok, f"100 trials, C_per {pd.C_per:.4f}, C'_per {pd.C_prime_per:.4f}, "
                  f"direct violations {direct_bad}, sample sup Q {sup_Q:.4f} <= Q(C)^2 {QC2:.4f}")


def test_criterion_6_epsilon_nets():
    g = rotation_conjugacy()
    pd = collect_periodic_data(g, 10)
    parts, ok = [], True
    for eps in (0.2, 0.1):
        net = build_epsilon_net(g, eps, pd, n_test=1000)
        ok &= net.coverage == 1.0 and net.max_distance <= eps
        part = f"eps {eps}: coverage {net.coverage:.3f}, size {net.size}"
        if eps == 0.1:
            oracle = circle_net_size(net.z[0], eps)
            ok &= net.size <= 4 * oracle
            part += f", circle oracle {oracle}"
        parts.append(part)
    record(6, ok, "; ".join(parts))


def test_criterion_7_invariant_norms():
    g = constant_conjugacy()
    x = Point.periodic(GOLDEN, (0, 0, 1))
    res = invariant_norm(g, x, 1e-4, 60)
    V = directions(2000)
    dist = log_ratio(grid_values(res.norm, V), theta_grid_values(CONSTANT_C, V))
    fam = build_family(g, L=config.DEFAULTS["L"], tol=1e-4, m_max=60)
    max_def = max(isometry_defect(g, fam, p).hi for p in fam.base_points)
    hp = holder_profile(g, fam, METRIC)
    ok = (res.converged and dist <= 2e-4 and fam.converged and max_def <= 3e-4
          and hp.fitted_c1 <= fam.K ** 10 * hp.c)
    record(7, ok, f"converged at m={res.convergence_m}, dist to oracle {dist:.2e}, "
                  f"max isometry defect {max_def:.2e}, fitted c1 {hp.fitted_c1:.3e} "
                  f"<= K^10 c {fam.K ** 10 * hp.c:.3e}")


def test_criterion_8_negative_control():
    g = diag()
    rep = verdict(g, Budget(), METRIC)
    cert = certify_fiber_bunching(g, METRIC, horizon=20)
    q_exact = isinstance(cert, NotCertified) and np.allclose(
        cert.q, [2.0 ** n for n in range(21)], rtol=1e-12)
    res = invariant_norm(g, Point.periodic(g.matrix, (0, 1)), 1e-6, 60)
    ok = rep.verdict is Verdict.UNBOUNDED and q_exact and res.diverged
    record(8, ok, f"verdict {rep.verdict.value}, q_n = 2^n for n <= 20: {q_exact}, "
                  f"diverged {res.diverged}")


def test_criterion_9_exactness_anchors():
    rng = np.random.default_rng(109)
    worst = 0.0
    for _ in range(20):
        A, B = rand_matrix(rng, 2), rand_matrix(rng, 2)
        exact = math.log(max(np.linalg.norm(A @ np.linalg.inv(B), 2),
                             np.linalg.norm(B @ np.linalg.inv(A), 2)))
        iv = norm_distance(NormRep([A]), NormRep([B]))
        oracle = dense_ratio_2d(NormRep([A]), NormRep([B]))
        worst = max(worst, abs(iv.lo - oracle), abs(iv.hi - oracle), abs(exact - oracle))
    count_bad = 0
    for M in TEST_MATRICES:
        T = np.array(M.to_list(), dtype=object)
        P = np.eye(M.k, dtype=object)
        for k in range(1, 13):
            P = P.dot(T)
            count_bad += len(periodic_points(M, k)) != int(np.trace(P))
    ok = worst <= 1e-6 and count_bad == 0
    record(9, ok, f"singleton distance vs dense oracle max err {worst:.2e}; "
                  f"periodic count mismatches {count_bad} over {len(TEST_MATRICES)} matrices, k <= 12")


def test_criterion_10_reproducibility(tmp_path, capsys):
    same = []
    for name in ("identity", "golden_rotation"):
        outs = [tmp_path / f"{name}_{i}" for i in (0, 1)]
        codes = [main(["run", str(DATA / f"{name}.json"), "--out", str(o)]) for o in outs]
        same.append(codes == [0, 0] and
                    (outs[0] / "report.json").read_bytes() == (outs[1] / "report.json").read_bytes())
        json.loads((outs[0] / "report.json").read_text())
    capsys.readouterr()
    record(10, all(same), f"byte-identical report.json: identity {same[0]}, "
                          f"golden_rotation {same[1]}")
