import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specop.besov import CoeffSet, DyadicCube, SpaceParams, besov_norm, seq_norm, smoothness_thresholds
from specop.grid import lebesgue_norm, lp_partition, make_grid, sample


@pytest.fixture(scope="module")
def grid():
    return make_grid(1, 512, 4 * math.pi)  # dxi = 1/4


def test_space_params_validation():
    with pytest.raises(ValueError):
        SpaceParams("C", 1, 2, 2)
    with pytest.raises(ValueError):
        SpaceParams("F", 1, math.inf, 2)
    with pytest.raises(ValueError):
        SpaceParams("B", 1, 0, 2)
    assert SpaceParams.besov(1.5, 3).q == 3


def test_single_frequency_only_hits_block_two(grid):
    part = lp_partition(grid)
    f = sample(grid, lambda x: np.exp(4j * x))
    for s in (0.0, 0.5, 1.7):
        norm = besov_norm(f, SpaceParams.besov(s, 2), part)
        assert norm == pytest.approx(2 ** (2 * s) * lebesgue_norm(f, 2), rel=1e-6)


def test_zero_field(grid):
    part = lp_partition(grid)
    assert besov_norm(sample(grid, np.zeros_like), SpaceParams.besov(1, 2), part) == 0.0


def test_l2_comparison_over_gaussians(grid):
    # B^0_{2,2} weighs each frequency by sum_j phi_j^2, which lies in [1/2, 1]
    part = lp_partition(grid)
    sp = SpaceParams.besov(0, 2)
    for w in np.linspace(0.2, 3.0, 20):
        f = sample(grid, lambda x: np.exp(-x**2 / (2 * w * w)))
        r = besov_norm(f, sp, part) / lebesgue_norm(f, 2)
        assert 0.5 <= r <= 2


def test_b_equals_f_at_p_equal_q(grid):
    part = lp_partition(grid)
    f = sample(grid, lambda x: np.exp(-x**2) * np.cos(3 * x))
    for s, p in [(1, 2), (0.5, 1.5), (2, 3)]:
        b = besov_norm(f, SpaceParams("B", s, p, p), part)
        ff = besov_norm(f, SpaceParams("F", s, p, p), part)
        assert b == pytest.approx(ff, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(alpha=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
       s=st.floats(-1, 3), p=st.floats(0.5, 6), q=st.floats(0.5, 6))
def test_homogeneity(alpha, s, p, q):
    g = make_grid(1, 128, 8.0)
    part = lp_partition(g)
    f = sample(g, lambda x: np.exp(-(x - 0.3) ** 2) * (1 + 0.2j * x))
    sp = SpaceParams("B", s, p, q)
    assert besov_norm(f * alpha, sp, part) == pytest.approx(abs(alpha) * besov_norm(f, sp, part),
                                                            rel=1e-12, abs=1e-300)


def test_monotone_in_s_without_low_block(grid):
    part = lp_partition(grid)
    f = sample(grid, lambda x: np.exp(-x**2 / 8) * np.cos(6 * x))
    lo = besov_norm(f, SpaceParams.besov(0.5, 2), part)
    hi = besov_norm(f, SpaceParams.besov(1.5, 2), part)
    assert hi / lo >= 1


def test_sup_norms(grid):
    part = lp_partition(grid)
    f = sample(grid, lambda x: np.exp(-x**2))
    assert besov_norm(f, SpaceParams("B", 0, math.inf, math.inf), part) > 0
    assert besov_norm(f, SpaceParams("F", 1, 2, math.inf), part) > 0


# -- sequence norms ---------------------------------------------------------------


def _single(j=2, n=1):
    c = CoeffSet(n=n, u=2, Jmax=j)
    c.entries[(j, ("M",) * n, (0,) * n)] = 1.0
    return c


def test_single_entry_b_norm():
    assert seq_norm(_single(), SpaceParams.besov(1, 2), "b") == pytest.approx(2.0, rel=1e-14)


def test_single_entry_f_norm():
    assert seq_norm(_single(), SpaceParams.besov(1, 2), "f") == pytest.approx(2.0, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), p=st.floats(0.5, 5), s=st.floats(-1, 2), n=st.sampled_from([1, 2]))
def test_b_and_f_sequence_norms_agree_when_p_equals_q(seed, p, s, n):
    rng = np.random.default_rng(seed)
    c = CoeffSet(n=n, u=3, Jmax=3)
    for _ in range(25):
        j = int(rng.integers(0, 4))
        G = tuple(rng.choice(["F", "M"], size=n)) if j == 0 else ("M",) * n
        m = tuple(int(v) for v in rng.integers(-6, 6, size=n))
        c.entries[(j, G, m)] = complex(rng.normal(), rng.normal())
    c.validate()
    sp = SpaceParams.besov(s, p)
    assert seq_norm(c, sp, "b") == pytest.approx(seq_norm(c, sp, "f"), rel=1e-10)


def test_coeffset_algebra_and_validation():
    a, b = _single(), _single()
    d = a - b
    assert seq_norm(d, SpaceParams.besov(1, 2)) == 0.0
    assert (a + b).scaled(0.5).entries == a.entries
    bad = CoeffSet(n=1, u=2, Jmax=2, entries={(1, ("F",), (0,)): 1.0})
    with pytest.raises(ValueError):
        bad.validate()
    assert seq_norm(CoeffSet(1, 2, 2), SpaceParams.besov(1, 2)) == 0.0
    with pytest.raises(ValueError):
        seq_norm(a, SpaceParams.besov(1, 2), "c")


def test_dyadic_cube():
    q = DyadicCube(3, (1, -2))
    np.testing.assert_allclose(q.corner, [1 / 8, -1 / 4])
    assert q.side == 1 / 8


def test_thresholds():
    r = smoothness_thresholds(2, SpaceParams.besov(0.3, 0.5))
    assert r.sigma_p == pytest.approx(2.0)
    r = smoothness_thresholds(1, SpaceParams("B", 1, 2, 1.5))
    assert r.sigma_p == 0 and r.sigma_pq == 0
    assert smoothness_thresholds(1, SpaceParams.besov(1, 2)).u_min_B == 2
    r = smoothness_thresholds(1, SpaceParams("F", 0.2, 2, 0.5))
    assert r.sigma_pq == pytest.approx(1.0)
    assert r.u_min_F == 1 and r.sigma_pq >= r.sigma_p
