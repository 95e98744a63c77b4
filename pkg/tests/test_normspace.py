import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cocycle_lab.cocycle import rotation
from cocycle_lab.normspace import (Interval, NormRep, NormSpaceError, NotInNKError,
                                   check_max_inequality, check_metric_equivalence,
                                   check_pullback_lipschitz, eval_norm, max_norms, norm_distance,
                                   norm_distance_prime, pullback, sphere_samples)

from cocycles import dense_ratio_2d, grid_values, refined_max_2d

PHI0 = NormRep.euclidean(2)


def rand_matrix(rng, d, spread=0.5):
    while True:
        A = np.eye(d) + spread * rng.normal(size=(d, d))
        if np.linalg.cond(A) < 10:
            return A


def rand_norm(rng, d=2, n=None, spread=0.5):
    n = int(rng.integers(1, 5)) if n is None else n
    return NormRep([rand_matrix(rng, d, spread) for _ in range(n)])


def dense_prime_2d(phi1, phi2, n=200_000):
    return refined_max_2d(lambda V: np.abs(grid_values(phi1, V) - grid_values(phi2, V)), n)


# --- representation --------------------------------------------------------

def test_eval_norm_examples():
    assert eval_norm(PHI0, [0.6, 0.8]) == pytest.approx(1.0)
    phi = NormRep([np.diag([2.0, 1.0])])
    assert eval_norm(phi, [0, 1]) == pytest.approx(1.0)
    assert eval_norm(phi, [1, 0]) == pytest.approx(2.0)
    with pytest.raises(NormSpaceError):
        eval_norm(phi, [1, 0, 0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_eval_norm_matches_brute_force_and_is_a_norm(seed, d):
    rng = np.random.default_rng(seed)
    mats = [rand_matrix(rng, d) for _ in range(4)]
    phi = NormRep(mats)
    V = rng.normal(size=(50, d))
    brute = np.array([max(np.linalg.norm(A @ v) for A in mats) for v in V])
    assert np.allclose(phi(V), brute, rtol=1e-12)
    u, w = V[:25], V[25:]
    assert (phi(u + w) <= phi(u) + phi(w) + 1e-12).all()
    assert np.allclose(phi(-3.0 * u), 3.0 * phi(u))
    # K sandwich
    r = phi(V) / np.linalg.norm(V, axis=1)
    assert (r <= phi.K * (1 + 1e-12)).all() and (r >= 1 / phi.K * (1 - 1e-12)).all()


def test_construction_errors():
    with pytest.raises(NormSpaceError):
        NormRep([])
    with pytest.raises(NormSpaceError):
        NormRep([[[1.0, 2.0], [2.0, 4.0]]])
    with pytest.raises(NormSpaceError):
        NormRep([[[np.nan, 0.0], [0.0, 1.0]]])


def test_serialization_roundtrip():
    phi = NormRep([np.diag([2.0, 1.0]), rotation(0.3) @ np.diag([1.0, 1.7])])
    back = NormRep.from_dict(phi.to_dict())
    V = sphere_samples(2)
    assert np.allclose(phi(V), back(V), rtol=1e-12)


def test_interval():
    iv = Interval(1.0, 3.0)
    assert iv.width == 2.0 and iv.mid == 2.0 and iv.contains(2.5)
    assert iv.to_dict() == {"lo": 1.0, "hi": 3.0}
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 3))
def test_pruning_is_sound(seed, d):
    rng = np.random.default_rng(seed)
    mats = [rand_matrix(rng, d) for _ in range(6)]
    mats += [0.5 * mats[0], rotation(0.7) @ mats[1] if d == 2 else mats[1]]
    full, pruned = NormRep(mats, prune=False), NormRep(mats)
    V = rng.normal(size=(1000, d))
    assert len(pruned) <= 6
    assert np.allclose(full(V), pruned(V), rtol=1e-12)
    G, Gi = pruned.generators, pruned.inverses
    for i in range(len(pruned)):
        for j in range(len(pruned)):
            if i != j:
                assert np.linalg.norm(G[i] @ Gi[j], 2) > 1.0


# --- pullback and max ------------------------------------------------------

def test_pullback_examples():
    rng = np.random.default_rng(0)
    phi = rand_norm(rng, n=3)
    V = sphere_samples(2)
    assert np.allclose(pullback(np.eye(2), phi)(V), phi(V))
    A, B = rand_matrix(rng, 2), rand_matrix(rng, 2)
    assert np.allclose(pullback(A, pullback(B, phi))(V), pullback(B @ A, phi)(V), rtol=1e-12)
    assert np.allclose(pullback(A, phi)(V), phi(V @ A.T), rtol=1e-12)
    rot = pullback(rotation(0.4), PHI0)
    assert len(rot) == 1 and np.allclose(rot.generators[0], np.eye(2))
    with pytest.raises(NormSpaceError):
        pullback(np.eye(3), phi)


def test_max_norms_examples():
    rng = np.random.default_rng(1)
    phi = rand_norm(rng, n=3)
    assert len(max_norms([phi, phi])) == len(phi)
    m = max_norms([PHI0, NormRep([np.diag([2.0, 1.0])])])
    assert len(m) == 1 and np.allclose(m.generators[0], np.diag([2.0, 1.0]))
    with pytest.raises(NormSpaceError):
        max_norms([])
    with pytest.raises(NormSpaceError):
        max_norms([PHI0, NormRep.euclidean(3)])


def test_max_norms_is_pointwise_max():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b = rand_norm(rng), rand_norm(rng)
        V = rng.normal(size=(1000, 2))
        assert np.allclose(max_norms([a, b])(V), np.maximum(a(V), b(V)), rtol=1e-12)


# --- distances -------------------------------------------------------------

def test_norm_distance_examples():
    phi = NormRep([np.diag([2.0, 1.0]), rotation(1.0) @ np.diag([1.0, 1.5])])
    assert norm_distance(phi, phi).to_dict() == {"lo": 0.0, "hi": 0.0}
    d = norm_distance(PHI0, NormRep([np.diag([2.0, 0.5])]))
    assert d.lo == d.hi == pytest.approx(math.log(2))
    with pytest.raises(NormSpaceError):
        norm_distance(PHI0, NormRep.euclidean(3))


def test_singleton_distance_matches_dense_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        a, b = rand_norm(rng, n=1), rand_norm(rng, n=1)
        d = norm_distance(a, b)
        assert d.width == 0.0
        assert d.lo == pytest.approx(dense_ratio_2d(a, b), abs=1e-6)


def test_multi_generator_distance_encloses_oracle():
    rng = np.random.default_rng(4)
    for _ in range(25):
        a, b = rand_norm(rng, n=4), rand_norm(rng, n=3)
        d = norm_distance(a, b)
        oracle = dense_ratio_2d(a, b)
        assert d.lo - 1e-9 <= oracle <= d.hi + 1e-12
        # the d = 2 enclosure is tight
        assert d.width < 1e-9


@pytest.mark.parametrize("d", [3, 4])
def test_distance_enclosure_higher_dims(d):
    rng = np.random.default_rng(d)
    for _ in range(10):
        a, b = rand_norm(rng, d, n=3), rand_norm(rng, d, n=2)
        iv = norm_distance(a, b)
        V = rng.normal(size=(20000, d))
        samp = math.log(max((a(V) / b(V)).max(), (b(V) / a(V)).max(), 1.0))
        assert samp <= iv.hi + 1e-12
        assert iv.lo <= iv.hi


def test_norm_distance_prime_examples():
    phi = NormRep([np.diag([2.0, 1.0])])
    assert norm_distance_prime(phi, phi).to_dict() == {"lo": 0.0, "hi": 0.0}
    iv = norm_distance_prime(PHI0, NormRep([2 * np.eye(2)]))
    assert iv.lo == pytest.approx(1.0) and iv.hi == pytest.approx(1.0)
    with pytest.raises(NormSpaceError):
        norm_distance_prime(NormRep.euclidean(4), NormRep.euclidean(4), method="grid")
    with pytest.raises(NormSpaceError):
        norm_distance_prime(PHI0, PHI0, method="simplex")


def test_norm_distance_prime_encloses_oracle():
    rng = np.random.default_rng(5)
    for _ in range(25):
        a, b = rand_norm(rng), rand_norm(rng)
        iv = norm_distance_prime(a, b)
        oracle = dense_prime_2d(a, b)
        assert iv.lo <= oracle * (1 + 1e-9) + 1e-12
        assert oracle <= iv.hi + 1e-12
        for method in ("grid", "algebraic"):
            assert oracle <= norm_distance_prime(a, b, method).hi + 1e-12


# --- invariants ------------------------------------------------------------

def test_pullback_action_is_isometric():
    rng = np.random.default_rng(6)
    for _ in range(30):
        a, b = rand_norm(rng, n=1), rand_norm(rng, n=1)
        A = rand_matrix(rng, 2)
        assert norm_distance(pullback(A, a), pullback(A, b)).lo == pytest.approx(
            norm_distance(a, b).lo, rel=1e-9, abs=1e-12)
        a, b = rand_norm(rng, n=3), rand_norm(rng, n=2)
        lhs, rhs = norm_distance(pullback(A, a), pullback(A, b)), norm_distance(a, b)
        assert lhs.lo <= rhs.hi + 1e-9 and rhs.lo <= lhs.hi + 1e-9


def test_diameter_of_NK():
    rng = np.random.default_rng(7)
    for d in (2, 3):
        for _ in range(20):
            phi = rand_norm(rng, d)
            assert norm_distance(phi, NormRep.euclidean(d)).hi <= math.log(phi.K) + 1e-12


# --- lemma checks ----------------------------------------------------------

def test_metric_equivalence_examples():
    phi = NormRep([np.diag([2.0, 1.0])])
    rep = check_metric_equivalence(phi, phi, 2.0)
    assert rep.ok and all(c[1] == 0 and c[2] == 0 for c in rep.checks)
    rep = check_metric_equivalence(PHI0, NormRep([np.diag([2.0, 0.5])]), 2.0)
    assert rep.ok
    (_, l1, r1, _), (_, l2, r2, _) = rep.checks
    assert (l1, r1) == pytest.approx((1.0, 8 * math.log(2)))
    assert (l2, r2) == pytest.approx((math.log(2), 2.0))
    with pytest.raises(NotInNKError):
        check_metric_equivalence(PHI0, NormRep([np.diag([3.0, 1.0])]), 2.0)


def test_metric_equivalence_random():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        a, b = rand_norm(rng, n=1), rand_norm(rng, n=1)
        assert check_metric_equivalence(a, b, max(a.K, b.K)).ok


def test_pullback_lipschitz_examples():
    A = np.diag([1.7, 0.8])
    rep = check_pullback_lipschitz(A, A, PHI0, 2.0)
    assert rep.ok and rep.checks[0][1] == 0.0 and rep.checks[0][2] == 0.0
    rep = check_pullback_lipschitz(np.eye(2), np.diag([1.1, 1.0]), PHI0, 1.1)
    assert rep.ok and rep.checks[0][1] == pytest.approx(math.log(1.1))
    assert rep.checks[0][2] == pytest.approx(1.1 ** 4 * 0.1)
    with pytest.raises(NotInNKError):
        check_pullback_lipschitz(np.eye(2), np.diag([3.0, 1.0]), PHI0, 1.1)


def test_pullback_lipschitz_random():
    rng = np.random.default_rng(9)
    for t in range(1000):
        d = 2 + t % 2
        phi = rand_norm(rng, d, n=1 + t % 3, spread=0.3)
        A, At = rand_matrix(rng, d, 0.3), rand_matrix(rng, d, 0.3)
        K = max(phi.K, pullback(A, phi).K, pullback(At, phi).K)
        assert check_pullback_lipschitz(A, At, phi, K).ok


def test_max_inequality_examples_and_random():
    rng = np.random.default_rng(10)
    phis = [rand_norm(rng, n=1) for _ in range(3)]
    rep = check_max_inequality(phis, phis)
    assert rep.ok and rep.checks[0][1] == 0.0
    a, b = rand_norm(rng, n=1), rand_norm(rng, n=1)
    rep = check_max_inequality([a], [b])
    assert rep.checks[0][1] == pytest.approx(rep.checks[0][2], rel=1e-12)
    with pytest.raises(NormSpaceError):
        check_max_inequality([a], [a, b])
    for _ in range(1000):
        ps = [rand_norm(rng, n=1) for _ in range(3)]
        qs = [rand_norm(rng, n=1) for _ in range(3)]
        assert check_max_inequality(ps, qs).ok
