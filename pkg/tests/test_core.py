import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rickerstage.core import (
    DomainError,
    FoldedParams,
    PeriodicSeq,
    RickerSystem,
    check_matching,
    fold_second_order,
    lcm_period,
    reduce,
)


@pytest.mark.parametrize("p1,p2,expected", [(1, 1, 1), (2, 3, 6), (4, 6, 12)])
def test_lcm_period(p1, p2, expected):
    assert lcm_period(p1, p2) == expected


def test_lcm_rejects_nonpositive():
    with pytest.raises(DomainError):
        lcm_period(0, 3)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=7), st.integers(0, 10_000))
def test_periodic_eval_wraps(values, n):
    s = PeriodicSeq(tuple(values))
    assert s(n) == s(n + s.period) == values[n % len(values)]


def test_nonminimal_period_kept():
    s = PeriodicSeq((1.0, 1.0))
    assert s.period == 2
    assert s.is_constant()


def test_system_validation():
    with pytest.raises(DomainError):
        RickerSystem.constant(alpha=-1.0)
    with pytest.raises(DomainError):
        RickerSystem(0.0, 0.0, 1.0, 0.0, 1.0, 0.0)  # beta never positive
    sys_ = RickerSystem(0.0, (0.0, 1.0), 1.0, 0.0, 1.0, 0.0)
    assert sys_.period == 2


def test_from_json(tmp_path):
    path = tmp_path / "sys.json"
    path.write_text(json.dumps({"alpha": 1, "beta": [1, 2], "sigma1": 1, "sigma2": 0,
                                "c1": [1, 2, 3], "c2": 0}))
    sys_ = RickerSystem.from_json(path)
    assert sys_.period == 6
    assert sys_.at(4) == (1.0, 1.0, 1.0, 0.0, 2.0, 0.0)
    with pytest.raises(DomainError):
        RickerSystem.from_mapping({"alpha": 1})


@pytest.mark.parametrize("alpha,beta,expected", [
    (1.0, 1.0, (1.0,)),
    (0.0, math.e, (1.0,)),
    ((0.0, 1.0), 1.0, (0.0, 1.0)),
])
def test_fold_examples(alpha, beta, expected):
    fp = fold_second_order(RickerSystem(alpha, beta, 1.0, 0.0, 1.0, 0.0))
    assert fp.a.tabulate(fp.a.period) == pytest.approx(expected, abs=1e-15)


def test_fold_uses_next_sigma1():
    sys_ = RickerSystem(0.0, 1.0, (1.0, 2.0), 0.0, 1.0, 0.0)
    fp = fold_second_order(sys_)
    assert fp.a.values == pytest.approx((math.log(2.0), 0.0))


def test_fold_errors():
    with pytest.raises(DomainError):
        fold_second_order(RickerSystem(0.0, (1.0, 0.0), 1.0, 0.0, 1.0, 0.0))
    with pytest.raises(DomainError):
        fold_second_order(RickerSystem.constant(sigma2=0.3))


def test_check_matching():
    assert check_matching(RickerSystem.constant(sigma1=0.5, c1=2.0, c2=1.0))
    assert not check_matching(RickerSystem.constant(sigma1=0.5, c1=2.0, c2=0.0))
    assert check_matching(RickerSystem(0.0, 1.0, (0.5, 2.0), 0.0, 3.0, (1.5, 6.0)))


def _fp(a, c1):
    c1 = PeriodicSeq.of(c1)
    return FoldedParams(PeriodicSeq.of(a), c1, c1, PeriodicSeq.of(1.0))


def test_reduce_constant_c1_is_bitwise():
    a = 4.5
    rp = reduce(_fp(a, 0.7))
    assert rp.d.values == (a,)
    assert rp.exact


def test_reduce_period_two_c1():
    rp = reduce(_fp(1.25, (0.5, 3.0)))
    assert rp.d.values == (1.25, 1.25)
    assert not rp.exact


def test_reduce_period_three_by_formula():
    c1 = (1.0, 2.0, 4.0)
    rp = reduce(_fp(0.0, c1))
    # d_n = ln(c1[n+1] / c1[n-1]) with indices mod 3
    expected = [math.log(c1[(n + 1) % 3] / c1[(n - 1) % 3]) for n in range(3)]
    assert rp.d.values == pytest.approx(expected, rel=1e-15)
    assert rp.d.values == pytest.approx((math.log(0.5), math.log(4.0), math.log(0.5)))


def test_reduce_errors():
    with pytest.raises(DomainError):
        FoldedParams  # noqa: B018
        reduce(FoldedParams(PeriodicSeq.of(1.0), PeriodicSeq.of(1.0),
                            PeriodicSeq.of(0.0), PeriodicSeq.of(1.0)))
    with pytest.raises(DomainError):
        reduce(_fp(1.0, (1.0, 0.0)))
