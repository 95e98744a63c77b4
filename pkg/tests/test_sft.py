import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cocycle_lab.sft import (AlphabetMismatchError, ClosingPreconditionError,
                             InadmissibleError, NoBracketError, NotPrimitiveError, Point, SFTError,
                             ShiftMetric, TransitionMatrix, agreement, bracket, close_orbit,
                             dense_orbit_segment, distance, is_in_local_stable,
                             is_in_local_unstable, periodic_points, shift)

from cocycles import FULL2, GOLDEN, TEST_MATRICES, brute_periodic_words, random_point


def words_strategy(matrix, lo=1, hi=12):
    return st.lists(st.integers(0, matrix.k - 1), min_size=lo, max_size=hi).filter(
        matrix.is_admissible)


# --- transition matrices ---------------------------------------------------

def test_rejects_non_primitive():
    with pytest.raises(NotPrimitiveError):
        TransitionMatrix(((0, 1), (1, 0)))
    with pytest.raises(NotPrimitiveError):
        TransitionMatrix(((1, 0), (0, 1)))


def test_rejects_stranded_and_malformed():
    with pytest.raises(SFTError):
        TransitionMatrix(((1, 1), (0, 0)))
    with pytest.raises(SFTError):
        TransitionMatrix(((1, 2), (1, 1)))
    with pytest.raises(SFTError):
        TransitionMatrix(((1,),))


def test_wielandt_bound_is_attained_by_primitive_example():
    # the Wielandt matrix needs exactly (k-1)^2 + 1 steps
    k = 4
    rows = [[0] * k for _ in range(k)]
    for i in range(k - 1):
        rows[i][i + 1] = 1
    rows[k - 1][0] = rows[k - 1][1] = 1
    M = TransitionMatrix(tuple(map(tuple, rows)))
    assert M.primitivity_exponent == (k - 1) ** 2 + 1


@pytest.mark.parametrize("M", TEST_MATRICES)
@pytest.mark.parametrize("k", range(1, 9))
def test_periodic_counts_match_trace_and_brute_force(M, k):
    pts = periodic_points(M, k)
    assert len(pts) == M.trace_power(k) == len(brute_periodic_words(M, k))
    assert all(shift(p, k) == p for p in pts)


def test_periodic_examples():
    assert len(periodic_points(FULL2, 3)) == 8
    assert [len(periodic_points(GOLDEN, k)) for k in (1, 2, 3)] == [1, 3, 4]
    M = TEST_MATRICES[3]
    assert sorted(p[0] for p in periodic_points(M, 1)) == [a for a in range(M.k)
                                                            if M.entries[a][a]]


# --- points ----------------------------------------------------------------

def test_inadmissible_point_rejected():
    with pytest.raises(InadmissibleError):
        Point.periodic(GOLDEN, (1, 1))
    with pytest.raises(InadmissibleError):
        Point(GOLDEN, (0,), (1, 1), 0, (0,))


def test_canonical_form_identifies_equal_sequences():
    a = Point.periodic(GOLDEN, (0, 1))
    b = Point.periodic(GOLDEN, (0, 1, 0, 1))
    c = Point(GOLDEN, (0, 1), (0, 1, 0), 0, (1, 0))
    assert a == b == c and hash(a) == hash(c)
    assert Point.periodic(GOLDEN, (1, 0)) == shift(a, 1) != a


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_shift_is_a_group_action(data):
    M = data.draw(st.sampled_from(TEST_MATRICES))
    core = data.draw(words_strategy(M))
    x = Point.from_window(M, core, data.draw(st.integers(-5, 5)))
    a, b = data.draw(st.integers(-20, 20)), data.draw(st.integers(-20, 20))
    assert shift(x, 0) == x
    assert shift(shift(x, a), b) == shift(x, a + b)
    for i in range(-10, 10):
        assert shift(x, a)[i] == x[i + a]


def test_fixed_point_shift():
    x = Point.periodic(GOLDEN, (0,))
    assert shift(x, 5) == x


# --- metric ----------------------------------------------------------------

def _scan_agreement(x, y, depth=64):
    for i in range(depth + 1):
        if x[i] != y[i] or x[-i] != y[-i]:
            return i
    return math.inf


def test_distance_examples():
    m = ShiftMetric(0.5)
    x = Point.periodic(FULL2, (0,))
    assert distance(x, x, m) == 0.0
    y = Point.from_window(FULL2, (1,), 0)
    assert distance(x, y, m) == 1.0
    # first disagreement at coordinates -3 and 3
    z = Point(FULL2, (0,), (1, 0, 0, 0, 0, 0, 1), -3, (0,))
    assert agreement(x, z) == 3 and distance(x, z, m) == 0.5 ** 3
    # agreement on |i| <= 3, first disagreement at coordinate 4
    w = Point(FULL2, (0,), (0, 0, 0, 0, 0, 0, 0, 1), -3, (0,))
    assert agreement(x, w) == 4 and distance(x, w, m) == 0.5 ** 4


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_agreement_matches_coordinate_scan(seed):
    rng = np.random.default_rng(seed)
    M = TEST_MATRICES[int(rng.integers(len(TEST_MATRICES)))]
    x = random_point(rng, M, 10)
    y = x
    # rewrite a window far from 0 with another admissible word
    j = int(rng.integers(1, 9))
    cand = [random_point(rng, M, 10) for _ in range(20)]
    for c in cand:
        if all(c[i] == x[i] for i in range(-j + 1, j)):
            y = c
            break
    assert agreement(x, y) == _scan_agreement(x, y)


def test_metric_rejects_bad_nu_and_mismatched_alphabets():
    with pytest.raises(ValueError):
        ShiftMetric(1.0)
    with pytest.raises(AlphabetMismatchError):
        distance(Point.periodic(GOLDEN, (0,)), Point.periodic(FULL2, (0,)))


# --- bracket ---------------------------------------------------------------

def _golden_points(radius=3):
    pts = []
    for w in GOLDEN.words(2 * radius + 1):
        pts.append(Point.from_window(GOLDEN, w, -radius))
    return pts


def test_bracket_properties_exhaustive_golden():
    pts = _golden_points(3)
    n = 0
    for x, z in itertools.product(pts, pts):
        if x[0] != z[0]:
            with pytest.raises(NoBracketError):
                bracket(x, z)
            continue
        y = bracket(x, z)
        assert is_in_local_stable(x, y) and is_in_local_unstable(z, y)
        assert bracket(y, z) == y
        n += 1
    assert n > 500
    assert all(bracket(x, x) == x for x in pts)


# --- closing ---------------------------------------------------------------

def test_closing_periodic_point_is_itself():
    p = Point.periodic(GOLDEN, (0, 0, 1))
    cert = close_orbit(p, 3)
    assert cert.periodic_point == p and cert.delta == 0.0
    assert all(v == math.inf for v in cert.per_step_bounds)


def test_closing_precondition():
    x = Point(GOLDEN, (0,), (1, 0, 0), 0, (0,))
    with pytest.raises(ClosingPreconditionError):
        close_orbit(x, 1)
    with pytest.raises(ClosingPreconditionError):
        close_orbit(x, 0)


def test_closing_full_shift_never_fails():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = random_point(rng, FULL2, 10)
        k = 6
        if agreement(x, shift(x, k)) >= 1:
            assert close_orbit(x, k).holds


# --- dense orbit -----------------------------------------------------------

@pytest.mark.parametrize("M,depth", [(FULL2, 3), (GOLDEN, 4), (TEST_MATRICES[5], 3)])
def test_dense_orbit_window_contains_every_word(M, depth):
    z, m = dense_orbit_segment(M, depth)
    seen = {tuple(z.window(j, j + depth)) for j in range(m + 1)}
    assert seen == {tuple(w) for w in M.words(depth)}
    if M is FULL2:
        assert m <= 2 ** 3 * 3 + 8


def test_dense_orbit_depth_zero():
    z, m = dense_orbit_segment(GOLDEN, 0)
    assert m == 0 and isinstance(z, Point)
