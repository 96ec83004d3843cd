"""Parameter sequences for the stage-structured Ricker system and its foldings.

The planar model is

    x[n+1] = sigma1[n] * y[n] + sigma2[n] * x[n]
    y[n+1] = beta[n] * x[n] * exp(alpha[n] - c1[n] * x[n] - c2[n] * y[n])

Every coefficient is a periodic sequence stored 0-based.  Sequences that
come from 1-based mathematical statements ("b_i for i = 1..p") put b_1 in
slot 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce as _fold
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

#: Exponents above this are treated as divergence rather than silently
#: producing ``inf`` (log of the largest double is ~709.8).
EXP_CAP = 700.0

#: Default relative tolerance for the structural matching condition.
MATCH_TOL = 1e-12

PARAM_NAMES = ("alpha", "beta", "sigma1", "sigma2", "c1", "c2")


class DomainError(ValueError):
    """Input outside the region where an operation is defined."""


class NumericOverflow(OverflowError):
    """An exponent exceeded :data:`EXP_CAP` or a state became non-finite."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


def capped_exp(z: float, cap: float = EXP_CAP, index=None) -> float:
    if z > cap:
        where = "" if index is None else f" at step {index}"
        raise NumericOverflow(f"exponent {z:.6g} exceeds cap {cap:g}{where}", index)
    return math.exp(z)


def lcm_period(p1: int, p2: int) -> int:
    if p1 < 1 or p2 < 1:
        raise DomainError(f"periods must be positive, got {p1}, {p2}")
    return math.lcm(p1, p2)


@dataclass(frozen=True)
class PeriodicSeq:
    """A real sequence given by one cycle of values; ``seq(n) == values[n % p]``.

    The cycle need not be minimal: ``PeriodicSeq((1.0, 1.0))`` is a valid
    period-2 description of a constant.
    """

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in np.atleast_1d(np.asarray(self.values, dtype=float)))
        if not vals:
            raise DomainError("a periodic sequence needs at least one value")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, spec: Union[float, Sequence[float], "PeriodicSeq"]) -> "PeriodicSeq":
        if isinstance(spec, PeriodicSeq):
            return spec
        return cls(tuple(np.atleast_1d(np.asarray(spec, dtype=float))))

    @property
    def period(self) -> int:
        return len(self.values)

    def __call__(self, n: int) -> float:
        return self.values[n % len(self.values)]

    eval = __call__

    def tabulate(self, p: int) -> np.ndarray:
        return np.array([self(n) for n in range(p)])

    def is_constant(self, rtol: float = 0.0) -> bool:
        v0 = self.values[0]
        return all(abs(v - v0) <= rtol * max(1.0, abs(v0)) for v in self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def __len__(self):
        return len(self.values)


def combined_period(seqs: Iterable[PeriodicSeq]) -> int:
    return _fold(lcm_period, (s.period for s in seqs), 1)


@dataclass(frozen=True)
class RickerSystem:
    alpha: PeriodicSeq
    beta: PeriodicSeq
    sigma1: PeriodicSeq
    sigma2: PeriodicSeq
    c1: PeriodicSeq
    c2: PeriodicSeq

    def __post_init__(self):
        for name in PARAM_NAMES:
            object.__setattr__(self, name, PeriodicSeq.of(getattr(self, name)))
        for name in PARAM_NAMES:
            vals = getattr(self, name).values
            if any(not math.isfinite(v) or v < 0 for v in vals):
                raise DomainError(f"{name} must be finite and non-negative, got {vals}")
        for name in ("beta", "sigma1"):
            if not any(v > 0 for v in getattr(self, name).values):
                raise DomainError(f"{name} must be positive in at least one slot")

    @classmethod
    def constant(cls, alpha=0.0, beta=1.0, sigma1=1.0, sigma2=0.0, c1=1.0, c2=0.0):
        return cls(alpha, beta, sigma1, sigma2, c1, c2)

    @classmethod
    def from_mapping(cls, data: Mapping) -> "RickerSystem":
        missing = [k for k in PARAM_NAMES if k not in data]
        if missing:
            raise DomainError(f"system is missing keys: {', '.join(missing)}")
        unknown = sorted(set(data) - set(PARAM_NAMES))
        if unknown:
            raise DomainError(f"unknown system keys: {', '.join(unknown)}")
        return cls(**{k: PeriodicSeq.of(data[k]) for k in PARAM_NAMES})

    @classmethod
    def from_json(cls, path) -> "RickerSystem":
        with open(Path(path)) as fh:
            return cls.from_mapping(json.load(fh))

    def to_mapping(self) -> dict:
        out = {}
        for name in PARAM_NAMES:
            vals = getattr(self, name).values
            out[name] = vals[0] if len(vals) == 1 else list(vals)
        return out

    @property
    def period(self) -> int:
        return combined_period(getattr(self, n) for n in PARAM_NAMES)

    def at(self, n: int):
        """Coefficients (alpha, beta, sigma1, sigma2, c1, c2) at time ``n``."""
        return tuple(getattr(self, name)(n) for name in PARAM_NAMES)


@dataclass(frozen=True)
class FoldedParams:
    """Coefficients of the second-order form (sigma2 = 0).

    ``x[n+1] = x[n-1] * exp(a[n] - c1[n] x[n-1] - (c2[n] / sigma1[n]) x[n])``
    with ``a[n] = alpha[n] + ln(beta[n] * sigma1[n+1])``.  Second-order index
    ``n`` corresponds to planar time ``n + 1``.
    """

    a: PeriodicSeq
    c1: PeriodicSeq
    c2: PeriodicSeq
    sigma1: PeriodicSeq

    @property
    def period(self) -> int:
        return combined_period((self.a, self.c1, self.c2, self.sigma1))


@dataclass(frozen=True)
class ReducedParams:
    """Exponent sequence of ``r[n+1] = r[n-1] exp(d[n] - r[n-1] - r[n])``.

    ``exact`` is True when ``r = c1 * x`` maps second-order solutions onto
    this equation without error, which requires ``c1`` constant.
    """

    d: PeriodicSeq
    exact: bool = True

    @classmethod
    def constant(cls, d: float) -> "ReducedParams":
        return cls(PeriodicSeq.of(d), True)


def fold_second_order(sys: RickerSystem) -> FoldedParams:
    if any(v != 0 for v in sys.sigma2.values):
        raise DomainError("folding to second order requires sigma2 = 0 on every slot")
    p = sys.period
    a = []
    for n in range(p):
        prod = sys.beta(n) * sys.sigma1(n + 1)
        if prod <= 0:
            raise DomainError(f"beta[{n}] * sigma1[{n + 1}] = 0; log undefined")
        a.append(sys.alpha(n) + math.log(prod))
    if any(v <= 0 for v in sys.sigma1.tabulate(p)):
        raise DomainError("sigma1 must be positive on every slot for the second-order form")
    return FoldedParams(PeriodicSeq(tuple(a)), sys.c1, sys.c2, sys.sigma1)


def _matches(c2, sigma1, c1, tol) -> bool:
    return abs(c2 - sigma1 * c1) <= tol * max(1.0, abs(c2))


def check_matching(sys: RickerSystem, tol: float = MATCH_TOL) -> bool:
    """True iff ``c2[n] == sigma1[n] * c1[n]`` on every slot, to ``tol`` relative."""
    p = sys.period
    return all(_matches(sys.c2(n), sys.sigma1(n), sys.c1(n), tol) for n in range(p))


def reduce(params: FoldedParams, tol: float = MATCH_TOL) -> ReducedParams:
    """Exponent ``d[n] = a[n] + ln(c1[n+1] / c1[n-1])`` of the scalar form.

    Raises :class:`DomainError` if c1 is not strictly positive or if the
    matching condition fails beyond ``tol``.
    """
    p = params.period
    c1 = params.c1
    if any(v <= 0 for v in c1.values):
        raise DomainError(f"c1 must be positive on every slot, got {c1.values}")
    for n in range(p):
        if not _matches(params.c2(n), params.sigma1(n), c1(n), tol):
            raise DomainError(f"matching condition c2 = sigma1 * c1 fails at slot {n}")
    d = []
    for n in range(p):
        ratio = c1(n + 1) / c1(n - 1)
        # ratio == 1.0 exactly for constant or period-2 c1; keep d == a bitwise
        d.append(params.a(n) if ratio == 1.0 else params.a(n) + math.log(ratio))
    return ReducedParams(PeriodicSeq(tuple(d)), exact=c1.is_constant())
