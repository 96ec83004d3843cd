"""Eigensequences of ``u[n+1] = a_n u[n] + b_n u[n-1]`` with periodic a, b.

Coefficients are 1-based in the mathematics (``a_1 .. a_p``) and stored in
slots ``0 .. p-1``.  The step producing ``u[n+1]`` (n >= 1) uses ``a_n``,
i.e. slot ``(n - 1) % p``.

The pair ``delta``/``theta`` are the two fundamental solutions of the
recurrence started from (0, 1) and (1, 0).  A period-p eigensequence
``r_1..r_p`` with ``r[n+1] = a_n + b_n / r_n`` exists when the quadratic
``delta_p r^2 + (theta_p - delta_{p+1}) r - theta_{p+1} = 0`` has a usable
real root; its product governs growth or decay of every solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import DomainError, PeriodicSeq, RickerSystem, lcm_period
from .simulate import Orbit

PERIODICITY_RTOL = 1e-9


class ImproperQuadratic(DomainError):
    pass


class NoRealEigensequence(DomainError):
    pass


@dataclass(frozen=True)
class LinearCoeffs:
    a: PeriodicSeq
    b: PeriodicSeq

    def __post_init__(self):
        object.__setattr__(self, "a", PeriodicSeq.of(self.a))
        object.__setattr__(self, "b", PeriodicSeq.of(self.b))
        if any(v < 0 for v in self.a.values + self.b.values):
            raise DomainError("linear coefficients must be non-negative")

    @property
    def p(self) -> int:
        return lcm_period(self.a.period, self.b.period)

    def coef(self, i: int):
        """``(a_i, b_i)`` for the 1-based index i."""
        return self.a(i - 1), self.b(i - 1)


@dataclass
class EigenData:
    p: int
    delta: np.ndarray
    theta: np.ndarray
    quad: Optional[tuple] = None
    r1: Optional[float] = None
    r: Optional[np.ndarray] = None
    product: Optional[float] = None
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"p": self.p, "delta": self.delta.tolist(), "theta": self.theta.tolist()}
        if self.quad is not None:
            out["quadratic"] = list(self.quad)
        if self.r is not None:
            out.update(r1=self.r1, r=self.r.tolist(), product=self.product)
        out["checks"] = dict(self.checks)
        return out


def delta_theta(lc: LinearCoeffs) -> EigenData:
    p = lc.p
    delta = np.zeros(p + 2)
    theta = np.zeros(p + 2)
    delta[1], theta[0] = 1.0, 1.0
    for k in range(1, p + 1):
        a, b = lc.coef(k)
        delta[k + 1] = a * delta[k] + b * delta[k - 1]
        theta[k + 1] = a * theta[k] + b * theta[k - 1]
    return EigenData(p, delta, theta)


def characteristic_quadratic(ed: EigenData):
    p = ed.p
    A = ed.delta[p]
    B = ed.theta[p] - ed.delta[p + 1]
    C = -ed.theta[p + 1]
    if A == 0 and B == 0 and C == 0:
        raise ImproperQuadratic("characteristic quadratic is 0 = 0")
    return float(A), float(B), float(C)


def _plus_root(A, B, C):
    if A == 0:
        if B == 0:
            raise NoRealEigensequence("degenerate quadratic has no root")
        return -C / B
    disc = B * B - 4 * A * C
    if disc < 0:
        raise NoRealEigensequence(f"negative discriminant {disc:.6g}; no real eigensequence")
    sq = math.sqrt(disc)
    # (-B + sq) / (2A) without cancellation
    if B <= 0:
        return (-B + sq) / (2 * A)
    return (2 * C) / (-B - sq) if (-B - sq) != 0 else 0.0


def product_closed_form(ed: EigenData) -> float:
    """Closed form for ``r_1 ... r_p`` valid when every ``b_i > 0``."""
    p = ed.p
    dp1, tp, dp, tp1 = ed.delta[p + 1], ed.theta[p], ed.delta[p], ed.theta[p + 1]
    return 0.5 * (dp1 + tp + math.sqrt((dp1 - tp) ** 2 + 4 * dp * tp1))


def eigensequence(lc: LinearCoeffs, rtol: float = PERIODICITY_RTOL) -> EigenData:
    """Positive eigensequence from the "+" root of the characteristic quadratic.

    Checks ``r_{p+1} == r_1`` and that the direct product agrees with
    ``delta_p r_1 + theta_p``; a failure of either means the root is
    numerically useless and raises :class:`NoRealEigensequence`.
    """
    ed = delta_theta(lc)
    ed.quad = characteristic_quadratic(ed)
    r1 = _plus_root(*ed.quad)
    if r1 == 0:
        raise NoRealEigensequence("characteristic root is zero")
    p = ed.p
    r = np.empty(p + 1)
    r[0] = r1
    for n in range(1, p + 1):
        a, b = lc.coef(n)
        r[n] = a + b / r[n - 1]
        if r[n] == 0 and n < p:
            raise NoRealEigensequence(f"eigensequence hits zero at r_{n + 1}")
    wrap = abs(r[p] - r1) / max(abs(r1), 1e-300)
    direct = float(np.prod(r[:p]))
    via_rs = float(ed.delta[p] * r1 + ed.theta[p])
    prod_err = abs(direct - via_rs) / max(abs(direct), abs(via_rs), 1e-300)
    ed.checks.update(periodicity_rel=wrap, product_rel=prod_err)
    if wrap > rtol:
        raise NoRealEigensequence(f"r_(p+1) differs from r_1 by {wrap:.3g} (relative)")
    if prod_err > rtol:
        raise NoRealEigensequence(f"product mismatch {prod_err:.3g} (relative)")
    ed.r1, ed.r, ed.product = float(r1), r[:p].copy(), direct
    if all(v > 0 for v in lc.b.values):
        ed.checks["closed_form"] = product_closed_form(ed)
    return ed


def direct_linear(lc: LinearCoeffs, u0: float, u1: float, n_steps: int) -> np.ndarray:
    """``u_0 .. u_{n_steps}`` by iterating the recurrence itself."""
    u = np.empty(max(n_steps + 1, 2))
    u[0], u[1] = u0, u1
    for n in range(1, n_steps):
        a, b = lc.coef(n)
        u[n + 1] = a * u[n] + b * u[n - 1]
    return u[:n_steps + 1]


def closed_form_u(ed: EigenData, lc: LinearCoeffs, u0: float, u1: float, n: int) -> float:
    """u_n from the explicit sum over the first-order factors."""
    if n == 0:
        return u0
    p = ed.p
    r = lambda i: ed.r[(i - 1) % p]
    t1 = u1 - ed.r1 * u0
    # t_i = t_1 (-1)^(i-1) b_1..b_{i-1} / (r_1..r_{i-1})
    t = [0.0, t1]
    for i in range(2, n + 1):
        a_prev, b_prev = lc.coef(i - 1)
        t.append(-t[-1] * b_prev / r(i - 1))
    total = t[n]
    tail = 1.0
    for i in range(n - 1, 0, -1):
        tail *= r(i + 1)
        total += tail * t[i]
    total += tail * r(1) * u0
    return total


def semiconj_solution(lc: LinearCoeffs, u0: float, u1: float, n_steps: int,
                      ed: Optional[EigenData] = None) -> Orbit:
    """Solution through the factor pair ``t[n+1] = -(b_n / r_n) t[n]``,
    ``u[n+1] = r_{n+1} u[n] + t[n+1]`` with ``t_1 = u_1 - r_1 u_0``.

    ``checks`` records the worst relative gap to direct iteration and the
    gap between the last value and the explicit closed form.
    """
    if ed is None:
        ed = eigensequence(lc)
    p = ed.p
    u = np.empty(max(n_steps + 1, 2))
    u[0], u[1] = u0, u1
    t = u1 - ed.r1 * u0
    for n in range(1, n_steps):
        _, b = lc.coef(n)
        t = -(b / ed.r[(n - 1) % p]) * t
        u[n + 1] = ed.r[n % p] * u[n] + t
    u = u[:n_steps + 1]
    ref = direct_linear(lc, u0, u1, n_steps)
    scale = np.maximum(np.maximum(np.abs(u), np.abs(ref)), 1e-300)
    checks = {"direct_max_rel": float(np.max(np.abs(u - ref) / scale)) if n_steps else 0.0}
    cf = closed_form_u(ed, lc, u0, u1, n_steps)
    checks["closed_form_rel"] = abs(cf - u[-1]) / max(abs(cf), abs(u[-1]), 1e-300)
    return Orbit(u, 0, checks)


def _alb_parts(ed: EigenData):
    p = ed.p
    lhs = ed.delta[p] * ed.theta[p + 1]
    rhs = (1 - ed.delta[p + 1]) * (1 - ed.theta[p])
    return lhs, rhs, ed.delta[p + 1] < 1, ed.theta[p] < 1


def criterion_alb(ed: EigenData) -> bool:
    """``delta_p theta_{p+1} < (1 - delta_{p+1})(1 - theta_p)`` with both
    factors on the right required positive, which makes the test equivalent
    to a product of eigensequence terms below 1."""
    lhs, rhs, g1, g2 = _alb_parts(ed)
    return bool(lhs < rhs and g1 and g2)


def criterion_p2(a1: float, a2: float, b1: float, b2: float) -> bool:
    if b1 >= 1 or b2 >= 1:
        return False
    return a1 * a2 < (1 - b1) * (1 - b2)


def bio_coeffs(sys: RickerSystem) -> LinearCoeffs:
    """Linear majorant of the planar x-dynamics.

    For n >= 1, ``x[n+1] <= sigma2[n] x[n] + sigma1[n] beta[n-1] e^alpha[n-1] x[n-1]``.
    Slot j of the result holds the coefficients of planar step ``n = j + 1``,
    so the linear solution seeded with ``(x0, x1)`` dominates ``x`` term by term.
    """
    p = sys.period
    a = [sys.sigma2(j + 1) for j in range(p)]
    b = [sys.sigma1(j + 1) * sys.beta(j) * math.exp(sys.alpha(j)) for j in range(p)]
    return LinearCoeffs(PeriodicSeq(tuple(a)), PeriodicSeq(tuple(b)))


@dataclass
class BextVerdict:
    extinct: bool
    b_gate: bool
    alb: bool
    guards: tuple
    lhs: float
    rhs: float
    mean_sigma2: float
    eigen: Optional[EigenData]
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "extinct": self.extinct,
            "b_below_one": self.b_gate,
            "alb": self.alb,
            "alb_lhs": self.lhs,
            "alb_rhs": self.rhs,
            "guards": {"delta_p1_below_one": self.guards[0], "theta_p_below_one": self.guards[1]},
            "mean_sigma2": self.mean_sigma2,
            "eigen": None if self.eigen is None else self.eigen.to_dict(),
            "note": self.note,
        }


def check_bext(sys: RickerSystem) -> BextVerdict:
    """Periodic-environment extinction: every composite fertility term below 1
    and the eigensequence product below 1."""
    lc = bio_coeffs(sys)
    ed = delta_theta(lc)
    lhs, rhs, g1, g2 = _alb_parts(ed)
    alb = criterion_alb(ed)
    b_gate = all(v < 1 for v in lc.b.values)
    note = ""
    eigen = ed
    if all(v > 0 for v in lc.a.values):
        try:
            eigen = eigensequence(lc)
        except DomainError as exc:
            note = f"eigensequence unavailable: {exc}"
    else:
        note = "sigma2 vanishes on some slot; criterion-only mode"
    p = sys.period
    return BextVerdict(bool(b_gate and alb), b_gate, alb, (bool(g1), bool(g2)),
                       float(lhs), float(rhs), float(sys.sigma2.tabulate(p).mean()),
                       eigen, note)
