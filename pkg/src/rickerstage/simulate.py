"""Orbits of the planar system, its second-order fold and the scalar form,
plus the boundedness and extinction tests that only need the coefficients."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .core import (
    EXP_CAP,
    DomainError,
    FoldedParams,
    NumericOverflow,
    ReducedParams,
    RickerSystem,
    capped_exp,
)

# A generator hook: n -> (alpha, beta, sigma1, sigma2, c1, c2).
ParamSource = Union[RickerSystem, Callable[[int], tuple]]

#: Window used to estimate limsup for non-periodic parameter generators.
LIMSUP_WINDOW = 10_000


class PlanarState(NamedTuple):
    x: float
    y: float


@dataclass
class Orbit:
    """Time-ordered states; ``values[k]`` is the state at ``start_index + k``.

    Planar runs store an ``(N, 2)`` array of (x, y); scalar runs an ``(N,)``
    array.  ``checks`` holds residuals computed while building the orbit.
    """

    values: np.ndarray
    start_index: int = 0
    checks: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    @property
    def x(self):
        return self.values[:, 0] if self.values.ndim == 2 else self.values

    @property
    def y(self):
        return self.values[:, 1]

    @property
    def indices(self):
        return np.arange(self.start_index, self.start_index + len(self.values))

    def at(self, n: int):
        return self.values[n - self.start_index]


def _coeffs(sys: ParamSource, n: int):
    return sys.at(n) if isinstance(sys, RickerSystem) else tuple(sys(n))


def step_planar(s, sys: ParamSource, n: int, cap: float = EXP_CAP) -> PlanarState:
    x, y = s
    alpha, beta, sigma1, sigma2, c1, c2 = _coeffs(sys, n)
    x_new = sigma1 * y + sigma2 * x
    y_new = beta * x * capped_exp(alpha - c1 * x - c2 * y, cap, n)
    if not (math.isfinite(x_new) and math.isfinite(y_new)):
        raise NumericOverflow(f"planar state became non-finite at step {n}", n)
    return PlanarState(x_new, y_new)


def iterate_planar(x0: float, y0: float, sys: ParamSource, n_steps: int,
                   cap: float = EXP_CAP) -> Orbit:
    if x0 < 0 or y0 < 0:
        raise DomainError("initial densities must be non-negative")
    if n_steps < 0:
        raise DomainError("n_steps must be non-negative")
    out = np.empty((n_steps + 1, 2))
    s = PlanarState(float(x0), float(y0))
    out[0] = s
    for k in range(n_steps):
        s = step_planar(s, sys, k, cap)
        out[k + 1] = s
    return Orbit(out, 0)


def iterate_second_order(x_m1: float, x_0: float, fp: FoldedParams, n_steps: int,
                         cap: float = EXP_CAP) -> Orbit:
    """Orbit ``x[-1], x[0], ..., x[n_steps]`` of the folded equation.

    Seeding with ``(x0, sigma1[0] * y0)`` of a planar run with sigma2 = 0
    reproduces its x-projection: entry ``k`` equals planar ``x[k]``.
    """
    if x_m1 < 0 or x_0 < 0:
        raise DomainError("initial values must be non-negative")
    out = np.empty(n_steps + 2)
    out[0], out[1] = x_m1, x_0
    prev, cur = float(x_m1), float(x_0)
    for n in range(n_steps):
        s1 = fp.sigma1(n)
        if s1 == 0:
            raise DomainError(f"sigma1[{n}] = 0 in the second-order form")
        z = fp.a(n) - fp.c1(n) * prev - (fp.c2(n) / s1) * cur
        prev, cur = cur, prev * capped_exp(z, cap, n)
        out[n + 2] = cur
    return Orbit(out, -1)


def iterate_reduced(r_m1: float, r_0: float, rp: Union[ReducedParams, float],
                    n_steps: int, cap: float = EXP_CAP) -> Orbit:
    """Orbit ``r[-1], r[0], ..., r[n_steps]`` of ``r[n+1] = r[n-1] exp(d[n] - r[n-1] - r[n])``."""
    if r_m1 <= 0 or r_0 <= 0:
        raise DomainError("initial values must be positive")
    if not isinstance(rp, ReducedParams):
        rp = ReducedParams.constant(rp)
    d = rp.d
    out = np.empty(n_steps + 2)
    out[0], out[1] = r_m1, r_0
    prev, cur = float(r_m1), float(r_0)
    for n in range(n_steps):
        prev, cur = cur, prev * capped_exp(d(n) - prev - cur, cap, n)
        out[n + 2] = cur
    return Orbit(out, -1)


def linear_comparison_bound(alpha: float, beta: float, x0: float, eps: float) -> float:
    """Eventual cap ``alpha / (1 - beta) + eps`` for ``x[n+1] <= alpha + beta x[n]``."""
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if alpha <= 0 or eps <= 0 or x0 < 0:
        raise DomainError("need alpha > 0, eps > 0 and x0 >= 0")
    return alpha / (1 - beta) + eps


def first_index_below(alpha: float, beta: float, x0: float, eps: float) -> int:
    """First n from which the comparison orbit ``u[n+1] = alpha + beta u[n]``
    stays below :func:`linear_comparison_bound`.

    The orbit is monotone toward its fixed point, so the first entry is final.
    """
    bound = linear_comparison_bound(alpha, beta, x0, eps)
    fix = alpha / (1 - beta)
    if x0 <= bound:
        return 0
    # u[n] - fix = beta**n (x0 - fix)
    n = math.ceil(math.log(eps / (x0 - fix)) / math.log(beta))
    n = max(n - 1, 0)
    u = fix + beta ** n * (x0 - fix)
    while u > bound:
        n += 1
        u = alpha + beta * u
    return n


@dataclass
class BoundReport:
    bound: float
    sigma_bar: float
    m0: float
    m1: float
    m2: float
    applicable: bool
    reason: str = ""


def uniform_bound(sys: RickerSystem, m_ratio: float) -> BoundReport:
    """Asymptotic cap on x for a periodic system with ``beta <= m_ratio * c1``.

    With ``M0 = m_ratio * exp(max alpha - 1)``, ``M1 = max sigma1`` and
    ``sigma_bar = max sigma2 < 1``, every non-negative orbit eventually has
    ``x <= (M0 * M1 + sigma_bar) / (1 - sigma_bar)``.
    """
    p = sys.period
    alpha, beta, s1, s2, c1 = (getattr(sys, k).tabulate(p)
                               for k in ("alpha", "beta", "sigma1", "sigma2", "c1"))
    sigma_bar = float(s2.max())
    m1 = float(s1.max())
    m2 = float(alpha.max())
    m0 = m_ratio * math.exp(m2 - 1)
    nan = float("nan")
    if sigma_bar >= 1:
        return BoundReport(nan, sigma_bar, m0, m1, m2, False, "max sigma2 >= 1")
    if m_ratio <= 0 or np.any(beta > m_ratio * c1):
        return BoundReport(nan, sigma_bar, m0, m1, m2, False,
                           "beta exceeds m_ratio * c1 on some slot")
    return BoundReport((m0 * m1 + sigma_bar) / (1 - sigma_bar), sigma_bar, m0, m1, m2, True)


class C0Verdict(NamedTuple):
    holds: bool
    limsup: float
    windowed: bool

    def __bool__(self):
        return self.holds


def check_c0(sys: ParamSource, window: int = LIMSUP_WINDOW) -> C0Verdict:
    """Extinction test ``limsup (sigma1 beta e^alpha + sigma2) < 1``.

    Exact for periodic systems (max over one period).  For a generator the
    limsup is estimated over ``n in [window, 2 * window)`` and the verdict is
    flagged as ``windowed``.
    """
    if isinstance(sys, RickerSystem):
        ns, windowed = range(sys.period), False
    else:
        ns, windowed = range(window, 2 * window), True
        warnings.warn("limsup estimated over a finite window; verdict is heuristic",
                      stacklevel=2)
    worst = -math.inf
    for n in ns:
        alpha, beta, sigma1, sigma2, _, _ = _coeffs(sys, n)
        worst = max(worst, sigma1 * beta * math.exp(alpha) + sigma2)
    return C0Verdict(worst < 1, worst, windowed)
