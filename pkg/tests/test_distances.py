import math
import time

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fullabc.distances import (MAD_SCALE, CompositeDistance, DegenerateSampleError, DistanceSpec,
                               LengthMismatchError, calibrate_weights, composite_eval,
                               cvm_distance, energy_distance, kl_1nn, median_pairwise_distance,
                               mmd2, wasserstein1)

import oracles

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def pair(min_n=1, max_n=10):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n),
                            st.lists(finite, min_size=n, max_size=n)))


# ---------------------------------------------------------------- Wasserstein-1

def test_w1_hand_value():
    assert wasserstein1([1, 2, 3], [5, 3, 2]) == pytest.approx(4 / 3, abs=1e-15)
    assert oracles.w1_exhaustive([1, 2, 3], [5, 3, 2]) == pytest.approx(4 / 3, abs=1e-15)


def test_w1_identical_and_single():
    assert wasserstein1([3.0, -1.0], [-1.0, 3.0]) == 0.0
    assert wasserstein1([0.0], [-2.5]) == 2.5


def test_w1_rejects_unequal_lengths():
    with pytest.raises(LengthMismatchError):
        wasserstein1([1, 2], [1, 2, 3])


def test_w1_matches_exhaustive_assignment_on_integers(rng):
    # integer data keeps every partial sum exact, so equality is exact
    for _ in range(200):
        n = int(rng.integers(1, 7))
        y = rng.integers(-50, 50, n).astype(float)
        z = rng.integers(-50, 50, n).astype(float)
        assert wasserstein1(y, z) == oracles.w1_exhaustive(list(y), list(z))


def test_w1_unequal_mode_matches_assignment_on_replicated_sample(rng):
    # F_y is unchanged by duplicating every y, so W1(y, z) with |y| = |z| / 2
    # equals the equal-size W1 against the doubled sample
    y = rng.normal(size=5)
    z = rng.normal(size=10)
    assert wasserstein1(y, z, allow_unequal=True) == pytest.approx(
        oracles.w1_assignment(np.repeat(y, 2), z), abs=1e-12)


@given(pair())
@settings(max_examples=200, deadline=None)
def test_w1_symmetric_nonnegative(yz):
    y, z = yz
    assert wasserstein1(y, z) >= 0
    assert wasserstein1(y, z) == wasserstein1(z, y)


# ---------------------------------------------------------------- Cramer-von Mises

def test_cvm_hand_values():
    assert cvm_distance([1, 3], [2, 4]) == pytest.approx(0.125, abs=1e-15)
    assert cvm_distance([1, 2], [3, 4]) == pytest.approx(0.375, abs=1e-15)
    assert oracles.cvm_integral([1, 3], [2, 4]) == pytest.approx(0.125, abs=1e-15)
    assert oracles.cvm_integral([1, 2], [3, 4]) == pytest.approx(0.375, abs=1e-15)


def test_cvm_separation_beats_interleaving():
    assert cvm_distance([1, 2], [3, 4]) > cvm_distance([1, 3], [2, 4])


def test_cvm_matches_scipy(rng):
    from scipy.stats import cramervonmises_2samp
    for n in (5, 17, 60):
        y, z = rng.normal(size=n), rng.normal(0.3, 1.2, size=n)
        assert cvm_distance(y, z) == pytest.approx(cramervonmises_2samp(y, z).statistic, abs=1e-12)


@given(pair())
@settings(max_examples=200, deadline=None)
def test_cvm_exp_invariance(yz):
    y, z = (np.asarray(v) / 200.0 for v in yz)  # keep exp() finite
    pooled = np.concatenate([y, z])
    # in floating point exp is only weakly increasing; require it to stay injective
    assume(np.unique(np.exp(pooled)).size == np.unique(pooled).size)
    assert cvm_distance(y, z) == cvm_distance(np.exp(y), np.exp(z))


@given(pair())
@settings(max_examples=200, deadline=None)
def test_cvm_symmetric_nonnegative(yz):
    y, z = yz
    assert cvm_distance(y, z) >= 0
    assert cvm_distance(y, z) == cvm_distance(z, y)


def test_cvm_ties_share_a_step():
    assert cvm_distance([1.0, 2.0], [2.0, 1.0]) == 0.0
    assert cvm_distance([1.0, 1.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(
        oracles.cvm_integral([1.0, 1.0, 3.0], [1.0, 2.0, 3.0]), abs=1e-15)


def test_cvm_rank_form_without_ties(rng):
    for _ in range(100):
        n = int(rng.integers(1, 12))
        y, z = rng.normal(size=n), rng.normal(size=n)
        ranks = np.argsort(np.argsort(np.concatenate([y, z]))) + 1
        r, s = np.sort(ranks[:n]), np.sort(ranks[n:])
        i = np.arange(1, n + 1)
        U = n * np.sum((r - i) ** 2) + n * np.sum((s - i) ** 2)
        rank_form = U / (n * n * 2 * n) - (4 * n * n - 1) / (6 * 2 * n)
        assert cvm_distance(y, z) == pytest.approx(rank_form, abs=1e-12)


# ---------------------------------------------------------------- energy

def test_energy_hand_values():
    assert energy_distance([0, 2], [1, 1]) == pytest.approx(1.0, abs=1e-15)
    assert energy_distance([0], [1]) == pytest.approx(2.0, abs=1e-15)
    assert energy_distance([4.0, -1.0, 2.0], [2.0, 4.0, -1.0]) == pytest.approx(0.0, abs=1e-14)


@given(pair())
@settings(max_examples=200, deadline=None)
def test_energy_nonnegative_symmetric(yz):
    y, z = yz
    e = energy_distance(y, z)
    assert e >= -1e-9 * (1 + max(map(abs, y + z)))
    assert e == pytest.approx(energy_distance(z, y), abs=1e-9)


def test_energy_order_must_be_at_least_one():
    with pytest.raises(ValueError):
        energy_distance([1.0], [2.0], p=0)


# ---------------------------------------------------------------- MMD

def test_mmd_zero_on_constant_samples():
    assert mmd2([0, 0], [0, 0], sigma=1.0) == 0.0


def test_mmd_large_bandwidth_limit(rng):
    y, z = rng.normal(size=6), rng.normal(3, 1, size=6)
    assert abs(mmd2(y, z, sigma=1e12)) < 1e-9
    assert abs(mmd2(y, z, kernel="laplace", sigma=1e12)) < 1e-9


def test_mmd_small_example_against_direct_sum():
    assert mmd2([0, 1], [0, 2], sigma=1.0) == pytest.approx(
        oracles.mmd_naive([0, 1], [0, 2], sigma=1.0), abs=1e-15)
    # by hand: k(0,1)=e^-1/2, k(0,2)=e^-2, k(1,2)=e^-1/2, cross over all four pairs
    e = math.exp
    hand = e(-0.5) + e(-2) - 2 * (1 + e(-2) + e(-0.5) + e(-0.5)) / 4
    assert mmd2([0, 1], [0, 2], sigma=1.0) == pytest.approx(hand, abs=1e-15)


def test_mmd_drop_cross_diagonal_flag():
    y, z = [0.0, 1.0, 3.0], [0.5, 2.0, 2.5]
    assert mmd2(y, z, drop_cross_diagonal=True) == pytest.approx(
        oracles.mmd_naive(y, z, drop_cross_diagonal=True), abs=1e-14)
    assert mmd2(y, z, drop_cross_diagonal=True) != mmd2(y, z)


def test_mmd_can_be_negative():
    assert mmd2([0.0, 1.0], [0.0, 1.0], sigma=1.0) < 0


def test_mmd_self_bounded(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        y = rng.normal(size=n)
        assert abs(mmd2(y, y, sigma=float(rng.uniform(0.1, 5)))) <= 2.0 / (n - 1) + 1e-12


def test_mmd_requires_two_points():
    with pytest.raises(DegenerateSampleError):
        mmd2([1.0], [2.0])


@given(pair(min_n=2))
@settings(max_examples=100, deadline=None)
def test_mmd_symmetric(yz):
    y, z = yz
    assert mmd2(y, z, sigma=50.0) == pytest.approx(mmd2(z, y, sigma=50.0), abs=1e-12)


def test_median_pairwise_distance():
    assert median_pairwise_distance([0.0, 1.0, 3.0]) == 2.0
    with pytest.raises(DegenerateSampleError):
        median_pairwise_distance([1.0, 1.0, 1.0])


# ---------------------------------------------------------------- KL 1-NN

def test_kl_hand_value():
    assert kl_1nn(y=[1, 5], z=[0, 2]) == pytest.approx(0.0, abs=1e-15)


def test_kl_ties_raise():
    with pytest.raises(DegenerateSampleError):
        kl_1nn([0.0, 1.0, 2.0], [0.0, 1.0, 2.0])


def test_kl_asymmetric(rng):
    y, z = rng.normal(size=20), rng.normal(1, 2, size=20)
    assert kl_1nn(y, z) != pytest.approx(kl_1nn(z, y), abs=1e-3)


def test_kl_gaussian_consistency():
    rng = np.random.default_rng(7)
    z, y = rng.normal(1, 1, 10**5), rng.normal(0, 1, 10**5)
    assert abs(kl_1nn(y, z) - 0.5) < 0.05


# ---------------------------------------------------------------- oracle sweep

def test_all_estimators_match_naive_oracles(rng):
    for _ in range(500):
        n = int(rng.integers(2, 11))
        y, z = rng.normal(size=n) * 3, rng.normal(0.5, 2, size=n)
        assert wasserstein1(y, z) == pytest.approx(oracles.w1_assignment(y, z), abs=1e-12)
        assert cvm_distance(y, z) == pytest.approx(oracles.cvm_integral(list(y), list(z)), abs=1e-12)
        assert energy_distance(y, z) == pytest.approx(oracles.energy_naive(y, z), abs=1e-12)
        for kern in ("gaussian", "laplace"):
            assert mmd2(y, z, kern, 1.3) == pytest.approx(oracles.mmd_naive(y, z, kern, 1.3), abs=1e-12)
        assert kl_1nn(y, z) == pytest.approx(oracles.kl_naive(list(y), list(z)), abs=1e-12)


def test_exp_map_changes_other_distances(rng):
    y, z = rng.normal(size=8), rng.normal(size=8)
    ey, ez = np.exp(y), np.exp(z)
    assert wasserstein1(y, z) != wasserstein1(ey, ez)
    assert energy_distance(y, z) != energy_distance(ey, ez)
    assert mmd2(y, z) != mmd2(ey, ez)
    assert kl_1nn(y, z) != kl_1nn(ey, ez)


# ---------------------------------------------------------------- specs and composites

def test_distance_spec_log_transform_and_validation():
    spec = DistanceSpec("wasserstein1", transform="log")
    assert spec([1.0, np.e], [np.e, np.e ** 2]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        spec([1.0, -1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        DistanceSpec("hellinger")
    with pytest.raises(ValueError):
        DistanceSpec("mmd", bandwidth=0.0)
    with pytest.raises(ValueError):
        DistanceSpec("energy", p=0)


def test_distance_spec_binds_mmd_bandwidth():
    y = np.array([0.0, 1.0, 3.0])
    gauss = DistanceSpec("mmd").bind(y)
    lap = DistanceSpec("mmd", kernel="laplace").bind(y)
    assert gauss.bandwidth == 4.0 and lap.bandwidth == 2.0
    with pytest.raises(ValueError):
        DistanceSpec("mmd")(y, y)


def test_composite_weighted_sum():
    class Const:
        def __init__(self, v):
            self.v = v

        def __call__(self, a, b):
            return self.v

        def bind(self, y):
            return self

    comp = CompositeDistance((Const(3.0), Const(5.0)), (0.5, 0.1))
    assert composite_eval(comp, [0, 0], [0, 0]) == pytest.approx(2.0)


def test_composite_single_part_and_identical_pieces():
    w = DistanceSpec("wasserstein1")
    comp = CompositeDistance((w,))
    assert comp([[1.0, 2.0]], [[2.0, 4.0]]) == w([1.0, 2.0], [2.0, 4.0])
    comp2 = CompositeDistance((DistanceSpec("l1"), DistanceSpec("cvm", allow_unequal=True)), (1.0, 2.0))
    pieces = [np.array([3.0]), np.array([5.5, 6.0, 9.0])]
    assert comp2(pieces, pieces) == 0.0


def test_composite_validation():
    w = DistanceSpec("wasserstein1")
    with pytest.raises(ValueError):
        CompositeDistance((w, w), (0.0, 0.0))
    with pytest.raises(ValueError):
        CompositeDistance((w,), (1.0, 2.0))
    with pytest.raises(ValueError):
        CompositeDistance((w,))([[1.0]], [[1.0], [2.0]])


def test_empty_pieces_in_unequal_mode():
    spec = DistanceSpec("wasserstein1", allow_unequal=True)
    assert spec([], []) == 0.0
    assert spec([6.0], []) == math.inf


def test_calibrate_weights():
    pool = np.array([0.0, 4.0])  # sd with ddof=1 is 2*sqrt(2)
    assert calibrate_weights([pool])[0] == pytest.approx(1 / (2 * math.sqrt(2)))
    sd2 = np.array([-2.0, 2.0]) / math.sqrt(2)  # ddof=1 sd is 2
    assert calibrate_weights([sd2 * 2 / 2])[0] == pytest.approx(0.5)
    assert calibrate_weights([[1, 2, 3, 4, 100]], robust=True)[0] == pytest.approx(1 / MAD_SCALE)
    assert 1 / MAD_SCALE == pytest.approx(0.6745, abs=1e-4)
    with pytest.raises(DegenerateSampleError):
        calibrate_weights([[1, 1, 1, 9]], robust=True)
    with pytest.raises(DegenerateSampleError):
        calibrate_weights([[2.0, 2.0]])


# ---------------------------------------------------------------- scaling

def _best_time(fn, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def test_complexity_scaling():
    rng = np.random.default_rng(3)
    small = rng.normal(size=(2, 10**3))
    large = rng.normal(size=(2, 10**4))
    checks = [(wasserstein1, 10 * math.log(1e4) / math.log(1e3)),
              (cvm_distance, 10 * math.log(1e4) / math.log(1e3)),
              (energy_distance, 100.0),
              (lambda a, b: mmd2(a, b, sigma=1.0), 100.0)]
    for fn, predicted in checks:
        # repeat the fast estimators so timer resolution does not dominate
        reps = 50 if predicted < 100 else 1
        t_small = _best_time(lambda: [fn(*small) for _ in range(reps)])
        t_large = _best_time(lambda: [fn(*large) for _ in range(reps)])
        ratio = t_large / t_small
        assert predicted / 50 <= ratio <= predicted * 50, (fn, ratio)
