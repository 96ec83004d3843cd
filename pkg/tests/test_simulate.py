import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SEED, random_seeds
from rickerstage.core import DomainError, NumericOverflow, RickerSystem, fold_second_order
from rickerstage.lineig import bio_coeffs, check_bext, direct_linear
from rickerstage.simulate import (
    check_c0,
    first_index_below,
    iterate_planar,
    iterate_reduced,
    iterate_second_order,
    linear_comparison_bound,
    step_planar,
    uniform_bound,
)


def test_step_example():
    s = step_planar((1.0, 1.0), RickerSystem.constant(), 0)
    assert s == (1.0, math.exp(-1.0))


def test_iterate_shape_and_zero_steps():
    orbit = iterate_planar(0.3, 0.4, RickerSystem.constant(), 0)
    assert orbit.values.shape == (1, 2)
    orbit = iterate_planar(0.3, 0.4, RickerSystem.constant(), 7)
    assert orbit.values.shape == (8, 2)
    assert orbit.at(0).tolist() == [0.3, 0.4]


def test_origin_is_fixed():
    orbit = iterate_planar(0.0, 0.0, RickerSystem.constant(alpha=2.0), 50)
    assert np.all(orbit.values == 0)


def test_negative_seed_rejected():
    with pytest.raises(DomainError):
        iterate_planar(-1.0, 0.0, RickerSystem.constant(), 3)


def test_overflow_is_reported():
    with pytest.raises(NumericOverflow):
        iterate_planar(1.0, 1.0, RickerSystem.constant(alpha=800.0), 3)
    big = RickerSystem.constant(alpha=5.0, beta=10.0, c1=0.0, c2=0.0)
    with pytest.raises(NumericOverflow):
        iterate_planar(1.0, 1.0, big, 2000)


def test_generator_hook():
    sys_ = RickerSystem(alpha=(0.5, 1.5), beta=1.0, sigma1=0.8, sigma2=0.2, c1=1.0, c2=0.3)
    a = iterate_planar(1.0, 2.0, sys_, 40).values
    b = iterate_planar(1.0, 2.0, sys_.at, 40).values
    assert np.array_equal(a, b)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.1, 3.0), st.floats(0.2, 2.0), st.floats(0.1, 2.0),
       st.floats(0.0, 1.0), st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_fold_reproduces_planar(alpha, beta, sigma1, c1, c2, x0, y0):
    sys_ = RickerSystem.constant(alpha=alpha, beta=beta, sigma1=sigma1, sigma2=0.0, c1=c1, c2=c2)
    planar = iterate_planar(x0, y0, sys_, 100).x
    folded = iterate_second_order(x0, sigma1 * y0, fold_second_order(sys_), 99).values
    # folded entry k is planar x_k
    assert np.allclose(folded, planar, rtol=1e-9, atol=1e-300)


def test_fold_reproduces_planar_periodic():
    sys_ = RickerSystem(alpha=(0.2, 1.1, 0.4), beta=(1.0, 2.0), sigma1=(0.5, 1.5), sigma2=0.0,
                        c1=(1.0, 0.7), c2=0.4)
    planar = iterate_planar(0.9, 1.7, sys_, 100).x
    folded = iterate_second_order(0.9, 0.5 * 1.7, fold_second_order(sys_), 99).values
    assert np.allclose(folded, planar, rtol=1e-10)


def test_reduced_matches_recurrence():
    r = iterate_reduced(0.4, 2.1, 3.0, 30).values
    for k in range(2, len(r)):
        assert r[k] == pytest.approx(r[k - 2] * math.exp(3.0 - r[k - 2] - r[k - 1]), rel=1e-14)


def test_linear_bound_examples():
    assert linear_comparison_bound(1.0, 0.5, 10.0, 0.01) == pytest.approx(2.01)
    # u_n - 2 = 98 / 2**n, first below 0.1 at n = 10
    assert first_index_below(1.0, 0.5, 100.0, 0.1) == 10


@given(st.floats(0.01, 10.0), st.floats(0.01, 0.99), st.floats(0.0, 1e4), st.floats(1e-6, 1.0))
def test_first_index_is_exact(alpha, beta, x0, eps):
    n = first_index_below(alpha, beta, x0, eps)
    bound = linear_comparison_bound(alpha, beta, x0, eps)
    u = [x0]
    for _ in range(n + 5):
        u.append(alpha + beta * u[-1])
    assert all(v <= bound for v in u[n:])
    if n > 0:
        assert u[n - 1] > bound


def test_uniform_bound_example():
    rep = uniform_bound(RickerSystem.constant(alpha=1.0, beta=1.0, sigma1=1.0, sigma2=0.5), 1.0)
    assert rep.applicable
    assert rep.bound == pytest.approx(3.0)


def test_uniform_bound_not_applicable():
    assert not uniform_bound(RickerSystem.constant(sigma2=1.0), 1.0).applicable
    assert not uniform_bound(RickerSystem.constant(beta=3.0), 1.0).applicable


def _random_system(rng, p_max=3, s2_max=0.9):
    p = int(rng.integers(1, p_max + 1))
    u = lambda lo, hi: tuple(rng.uniform(lo, hi, size=p))
    return RickerSystem(alpha=u(0.0, 2.0), beta=u(0.1, 2.0), sigma1=u(0.1, 2.0),
                        sigma2=u(0.0, s2_max), c1=u(0.5, 2.0), c2=u(0.0, 1.0))


def test_uniform_bound_soundness():
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        sys_ = _random_system(rng)
        p = sys_.period
        ratio = float(np.max(sys_.beta.tabulate(p) / sys_.c1.tabulate(p)))
        rep = uniform_bound(sys_, ratio)
        assert rep.applicable
        for x0, y0 in random_seeds(rng, 5):
            x = iterate_planar(x0, y0, sys_, 3000).x
            assert np.max(x[-500:]) <= rep.bound * (1 + 1e-9)


def test_c0_verdicts():
    v = check_c0(RickerSystem.constant(alpha=0.0, beta=0.5, sigma1=1.0, sigma2=0.3))
    assert v and v.limsup == pytest.approx(0.8) and not v.windowed
    assert not check_c0(RickerSystem.constant())


def test_c0_generator_warns():
    hook = lambda n: (0.0, 0.5, 1.0, 0.2 + 0.1 * math.sin(n), 1.0, 0.0)
    with pytest.warns(UserWarning):
        v = check_c0(hook, window=1000)
    assert v.windowed and v.holds


def test_c0_soundness():
    rng = np.random.default_rng(SEED)
    checked = 0
    while checked < 15:
        sys_ = _random_system(rng)
        c0 = check_c0(sys_)
        if not c0.limsup <= 0.95:
            continue
        checked += 1
        for x0, y0 in random_seeds(rng, 5):
            tail = iterate_planar(x0, y0, sys_, 2000).values[-1]
            assert np.all(tail < 1e-8)


def test_linear_majorant_dominates():
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        sys_ = _random_system(rng, s2_max=1.5)
        lc = bio_coeffs(sys_)
        for x0, y0 in random_seeds(rng, 3):
            x = iterate_planar(x0, y0, sys_, 60).x
            u = direct_linear(lc, x[0], x[1], 60)
            assert np.all(x <= u * (1 + 1e-12))


def test_bext_soundness():
    rng = np.random.default_rng(SEED)
    found = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(400):
            p = 2
            sys_ = RickerSystem(alpha=0.0, beta=tuple(rng.uniform(0.05, 0.6, p)), sigma1=1.0,
                                sigma2=tuple(rng.uniform(0.01, 2.5, p)), c1=1.0, c2=0.5)
            v = check_bext(sys_)
            if not (v.extinct and v.eigen is not None and v.eigen.product < 0.9):
                continue
            found += 1
            for x0, y0 in random_seeds(rng, 3):
                tail = iterate_planar(x0, y0, sys_, 10_000).values[-1]
                assert np.all(tail < 1e-8)
            if found == 10:
                break
    assert found == 10
