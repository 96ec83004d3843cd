"""Factorization of ``r[n+1] = r[n-1] exp(d - r[n-1] - r[n])`` into
first-order maps.

With ``t0 = r0 / (r_{-1} e^{-r_{-1}})`` and ``t1 = e^d / t0`` the orbit
alternates between the curves ``g_t(r) = t r e^{-r}``:

    r[2k]   = g_{t0}(r[2k-1]),      r[2k+1] = g_{t1}(r[2k])

so odd-indexed terms follow ``f_{t0} = g_{t1} o g_{t0}`` starting from
``r_{-1}`` and even-indexed terms follow ``f_{t1}``, where

    f_t(r) = r exp(d - r - t r e^{-r}).

Everything about periodicity of the second-order equation therefore
reduces to the one-dimensional maps ``f_t``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import brentq

from .core import EXP_CAP, DomainError, NumericOverflow, capped_exp
from .simulate import iterate_reduced

CYCLE_TOL = 1e-8
TRANSIENT = 2000
MAX_PERIOD = 64
DEGENERATE_TOL = 1e-6
PERIOD3_GRID = 10_000
#: Reference d above which the invariant-curve map has a period-3 point.
PERIOD3_D = 6.26


class CycleError(ArithmeticError):
    pass


class DegenerateMultiplierWarning(RuntimeWarning):
    pass


def _exp(z, cap=EXP_CAP):
    if np.ndim(z) == 0:
        return capped_exp(float(z), cap)
    z = np.asarray(z, dtype=float)
    if np.any(z > cap):
        raise NumericOverflow(f"exponent {float(np.max(z)):.6g} exceeds cap {cap:g}")
    return np.exp(z)


@dataclass(frozen=True)
class MapConfig:
    d: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t}")


@dataclass(frozen=True)
class FactorState:
    d: float
    t0: float

    @classmethod
    def from_seeds(cls, d: float, r_m1: float, r_0: float) -> "FactorState":
        return cls(d, compute_t0(r_m1, r_0))

    @property
    def t1(self) -> float:
        return math.exp(self.d) / self.t0

    @property
    def on_curve(self) -> bool:
        return on_invariant_curve(self.d, self.t0)


def compute_t0(r_m1: float, r_0: float) -> float:
    if r_m1 <= 0 or r_0 <= 0:
        raise DomainError("seeds must be positive")
    return r_0 / (r_m1 * math.exp(-r_m1))


def on_invariant_curve(d: float, t0: float, rtol: float = 1e-12) -> bool:
    return abs(t0 - math.exp(d / 2)) <= rtol * math.exp(d / 2)


def f_map(r, cfg: MapConfig):
    return r * _exp(cfg.d - r - cfg.t * r * np.exp(-r))


def f_derivative(r, cfg: MapConfig):
    # f'(r) = e^eta(r) (1 - r)(1 - t r e^{-r}),  eta(r) = d - r - t r e^{-r}
    tre = cfg.t * r * np.exp(-r)
    return _exp(cfg.d - r - tre) * (1 - r) * (1 - tre)


def g_map(r, t: float):
    return t * r * np.exp(-r)


def g_derivative(r, t: float):
    return t * (1 - r) * np.exp(-r)


def state_map(u: float, r: float, d: float):
    """One step ``(r[n-1], r[n]) -> (r[n], r[n+1])`` in the state plane."""
    return r, u * capped_exp(d - u - r)


def jacobian_fd(fn, point, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a map R^k -> R^k."""
    point = np.asarray(point, dtype=float)
    k = point.size
    jac = np.empty((k, k))
    for j in range(k):
        e = np.zeros(k)
        e[j] = h
        jac[:, j] = (np.asarray(fn(*(point + e))) - np.asarray(fn(*(point - e)))) / (2 * h)
    return jac


def fixed_point_eigenvalues(d: float):
    """Exact linearization eigenvalues at ``(d/2, d/2)``.

    The Jacobian is ``[[0, 1], [1 - d/2, -d/2]]``, with characteristic
    polynomial ``(lam + 1)(lam - (1 - d/2))``.
    """
    return -1.0, 1.0 - d / 2


def origin_eigenvalues(a: float):
    """Linearization of ``x[n+1] = x[n-1] exp(a - ...)`` at 0: ``lam^2 = e^a``."""
    return math.exp(a / 2), -math.exp(a / 2)


def verify_factorization(r_m1: float, r_0: float, d: float, n_steps: int) -> dict:
    """Check the factor pair step by step along a directly iterated orbit.

    Residuals reported (all relative, worst over the orbit):

    * ``t_product``: ``t[n+1] t[n]`` against ``e^d``;
    * ``orbit``: ``r[n] = t[n] r[n-1] e^{-r[n-1]}`` with ``t`` alternating
      ``t0, t1`` (so no information from the orbit enters ``t``);
    * ``odd_terms``: ``r[2k+1]`` against ``g_{t1}(g_{t0}(r[2k-1]))``, that is
      ``f_{t0}`` one step at a time;
    * ``even_terms``: ``r[2k+2]`` against ``f_{t1}(r[2k])``.

    Each comparison starts from the exact preceding orbit value, so the
    residuals stay at rounding level even on chaotic orbits.
    """
    fs = FactorState.from_seeds(d, r_m1, r_0)
    t0, t1 = fs.t0, fs.t1
    direct = iterate_reduced(r_m1, r_0, d, n_steps).values
    rel = lambda a, b: float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))) if len(b) else 0.0

    # t_n = r_n / (r_{n-1} e^{-r_{n-1}}), n >= 0
    t = direct[1:] / (direct[:-1] * np.exp(-direct[:-1]))
    ed = math.exp(d)
    t_prod = rel(t[1:] * t[:-1], np.full(len(t) - 1, ed))

    # direct[k] is r_{k-1}; t_n = t0 for even n, t1 for odd n
    tn = np.where(np.arange(len(direct) - 1) % 2 == 0, t0, t1)
    orbit_rel = rel(tn * direct[:-1] * np.exp(-direct[:-1]), direct[1:])

    odd = direct[0::2]           # r_{-1}, r_1, r_3, ...
    even = direct[1::2]          # r_0, r_2, ...
    odd_rel = rel(g_map(g_map(odd[:-1], t0), t1), odd[1:])
    even_rel = rel(f_map(even[:-1], MapConfig(d, t1)), even[1:])

    curve = None
    if fs.on_curve:
        gcurve = g_map(direct[:-1], math.exp(d / 2))
        curve = float(np.max(np.abs(direct[1:] - gcurve)))
    return {
        "d": d, "r_m1": r_m1, "r0": r_0, "t0": t0, "t1": t1, "steps": n_steps,
        "on_invariant_curve": fs.on_curve,
        "residuals": {
            "t_product": t_prod,
            "orbit": orbit_rel,
            "odd_terms": odd_rel,
            "even_terms": even_rel,
            "invariant_curve": curve,
        },
    }


@dataclass
class CycleResult:
    points: List[float]
    period: int
    multiplier: float
    converged: bool
    residual: float
    t: Optional[float] = None
    d: Optional[float] = None

    @property
    def stable(self) -> bool:
        return self.converged and abs(self.multiplier) < 1

    def to_dict(self) -> dict:
        return {"points": list(self.points), "period": self.period,
                "multiplier": self.multiplier, "converged": self.converged,
                "residual": self.residual, "t": self.t, "d": self.d}


def minimal_period(values, tol: float = CYCLE_TOL, max_period: int = MAX_PERIOD) -> Optional[int]:
    """Smallest q with ``|v[i+q] - v[i]| < tol * max(1, |v[i]|)`` across the
    whole window, or None.  The window must hold at least two full cycles."""
    v = np.asarray(values, dtype=float)
    for q in range(1, max_period + 1):
        if len(v) < 2 * q:
            break
        diff = np.abs(v[q:] - v[:-q])
        if np.all(diff < tol * np.maximum(1.0, np.abs(v[:-q]))):
            return q
    return None


def _cycle_stats(pts, cfg):
    q = len(pts)
    mult = float(np.prod([f_derivative(s, cfg) for s in pts]))
    res = max(abs(float(f_map(pts[k], cfg)) - pts[(k + 1) % q]) for k in range(q))
    return mult, res


def _polish(pts, cfg, iters: int = 8):
    """Newton on ``f^q(x) - x`` at the first point; keeps the better cycle."""
    q = len(pts)
    best = list(pts)
    _, best_res = _cycle_stats(best, cfg)
    x = pts[0]
    for _ in range(iters):
        orbit = [x]
        for _ in range(q):
            orbit.append(float(f_map(orbit[-1], cfg)))
        deriv = float(np.prod([f_derivative(s, cfg) for s in orbit[:q]]))
        if deriv == 1.0:
            break
        x_new = x - (orbit[q] - x) / (deriv - 1.0)
        if not (x_new > 0 and math.isfinite(x_new)):
            break
        x = x_new
        cand = [x]
        for _ in range(q - 1):
            cand.append(float(f_map(cand[-1], cfg)))
        _, res = _cycle_stats(cand, cfg)
        if res < best_res:
            best, best_res = cand, res
        if res == 0:
            break
    return best


def detect_cycle(cfg: MapConfig, seed: float, transient: int = TRANSIENT,
                 max_period: int = MAX_PERIOD, tol: float = CYCLE_TOL) -> CycleResult:
    """Attracting cycle reached by ``f_t`` from ``seed``.

    After ``transient`` iterations a window of ``2 * max_period + 1`` points
    is scanned for the minimal period that holds across the whole window.
    Detected points are refined by Newton's method on ``f^q(x) = x``.
    ``converged=False`` means no period up to ``max_period`` was found; the
    trailing window is returned as ``points``.
    """
    if seed <= 0:
        raise DomainError("seed must be positive")
    x = float(seed)
    for _ in range(transient):
        x = float(f_map(x, cfg))
    window = [x]
    for _ in range(2 * max_period):
        window.append(float(f_map(window[-1], cfg)))
    q = minimal_period(window, tol, max_period)
    if q is None:
        return CycleResult(window, 0, float("nan"), False, float("nan"), cfg.t, cfg.d)
    pts = _polish(window[:q], cfg)
    mult, res = _cycle_stats(pts, cfg)
    return CycleResult(pts, q, mult, True, res, cfg.t, cfg.d)


def shadow_cycle(cr: CycleResult, d: float, t0: float) -> CycleResult:
    """Image of a cycle of ``f_{t0}`` under ``g_{t0}``: a cycle of ``f_{t1}``
    with the same period and, away from r = 1, the same multiplier."""
    t1 = math.exp(d) / t0
    cfg1 = MapConfig(d, t1)
    if not cr.converged:
        # non-periodic orbits map to non-periodic orbits
        pts = [float(g_map(s, t0)) for s in cr.points]
        return CycleResult(pts, 0, float("nan"), False, float("nan"), t1, d)
    if any(abs(s - 1.0) <= DEGENERATE_TOL for s in cr.points):
        warnings.warn("cycle point within 1e-6 of r = 1; g' vanishes there and the "
                      "multiplier transfer argument does not apply",
                      DegenerateMultiplierWarning, stacklevel=2)
    pts = [float(g_map(s, t0)) for s in cr.points]
    q = len(pts)
    mult, res = _cycle_stats(pts, cfg1)
    period = minimal_period(pts + pts, tol=max(CYCLE_TOL, 10 * res), max_period=q) or q
    return CycleResult(pts, period, mult, True, res, t1, d)


def lift_cycle(cr: CycleResult, d: float, t0: float, tol: float = 1e-9) -> List[float]:
    """Interleave a q-cycle of ``f_{t0}`` with its ``g_{t0}`` image:
    ``[s_1, g(s_1), ..., s_q, g(s_q)]``, a cycle of the second-order equation.

    Raises :class:`CycleError` if the interleaved list is not invariant
    under the state map to ``tol`` relative.
    """
    if not cr.converged:
        raise CycleError("cannot lift a non-periodic orbit")
    lifted = []
    for s in cr.points:
        lifted.extend([s, float(g_map(s, t0))])
    n = len(lifted)
    worst = 0.0
    for k in range(n):
        nxt = lifted[k - 1] * math.exp(d - lifted[k - 1] - lifted[k])
        target = lifted[(k + 1) % n]
        worst = max(worst, abs(nxt - target) / max(abs(target), 1e-300))
    if worst > tol:
        raise CycleError(f"lifted cycle fails the recurrence by {worst:.3g}")
    return lifted


def eta(x, d: float, gamma: float):
    return d - x - gamma * x * np.exp(-x)


def _eta_roots(d: float, gamma: float, hi: float, grid: int = 20_000):
    xs = np.linspace(0.0, hi, grid + 1)
    vals = eta(xs, d, gamma)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
        lo, up = xs[i], xs[i + 1]
        if vals[i] == 0:
            roots.append(float(lo))
            continue
        if vals[i + 1] == 0:
            continue
        roots.append(brentq(eta, lo, up, args=(d, gamma), xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return roots


def fixed_point_dr(d: float, gamma: float) -> float:
    """Unique positive root of ``eta(x) = d - x - gamma x e^{-x}`` for 0 < d <= 2.

    ``eta(0) = d > 0`` and ``eta(d) < 0``, so ``[0, d]`` brackets the root.
    For d > 2 uniqueness is not guaranteed; use :func:`fixed_points_dr`.
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if not 0 < d <= 2:
        raise DomainError(f"unique fixed point only established for 0 < d <= 2, got d={d}")
    return brentq(eta, 0.0, d, args=(d, gamma), xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass
class FixedPoints:
    roots: List[float]
    uniqueness_proven: bool


def fixed_points_dr(d: float, gamma: float, grid: int = 20_000) -> FixedPoints:
    """All positive roots of eta on ``(0, d]``; flagged when d > 2."""
    if d <= 0 or gamma <= 0:
        raise DomainError("need d > 0 and gamma > 0")
    if d <= 2:
        return FixedPoints([fixed_point_dr(d, gamma)], True)
    # eta(x) < 0 for x >= d, so every root lies in (0, d)
    return FixedPoints(_eta_roots(d, gamma, d, grid), False)


@dataclass
class TwoCycle:
    """Limits of the odd- and even-indexed terms.

    ``rho1`` is the limit of ``r_{2k-1}`` (the fixed point of ``f_{t0}``),
    ``rho2`` that of ``r_{2k}`` (the fixed point of ``f_{t1}``).
    """

    rho1: float
    rho2: float
    d: float
    t0: float
    degenerate: bool = False
    checks: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.rho1

    @property
    def m(self):
        return self.rho2

    def to_dict(self) -> dict:
        return {"rho1": self.rho1, "rho2": self.rho2, "sum": self.rho1 + self.rho2,
                "d": self.d, "t0": self.t0, "t1": math.exp(self.d) / self.t0,
                "degenerate": self.degenerate, "checks": dict(self.checks)}


def two_cycle_rmsa(d: float, r_m1: float, r_0: float, verify_steps: int = 100_000,
                   tol: float = 1e-6) -> TwoCycle:
    """Two-cycle reached from ``(r_m1, r_0)`` when 0 < d <= 2.

    The limits come from the fixed points of ``f_{t0}`` and ``f_{t1}``; the
    orbit is then iterated (up to ``verify_steps``) and ``checks`` records
    the step at which both subsequences were within ``tol`` of them.
    """
    t0 = compute_t0(r_m1, r_0)
    if on_invariant_curve(d, t0):
        if not 0 < d <= 2:
            raise DomainError(f"two-cycle analysis needs 0 < d <= 2, got {d}")
        return TwoCycle(d / 2, d / 2, d, t0, degenerate=True)
    t1 = math.exp(d) / t0
    rho1 = fixed_point_dr(d, t0)
    rho2 = fixed_point_dr(d, t1)
    checks = {"sum_error": abs(rho1 + rho2 - d),
              "shadow_error": abs(float(g_map(rho1, t0)) - rho2)}
    prev, cur = float(r_m1), float(r_0)
    hit = None
    for n in range(1, verify_steps + 1):
        prev, cur = cur, prev * math.exp(d - prev - cur)
        # cur = r_n, prev = r_{n-1}
        odd, even = (cur, prev) if n % 2 else (prev, cur)
        if abs(odd - rho1) < tol and abs(even - rho2) < tol:
            hit = n
            break
    checks["converged_at"] = hit
    return TwoCycle(rho1, rho2, d, t0, False, checks)


@dataclass
class Period3Witness:
    found: bool
    bracket: Optional[tuple] = None
    point: Optional[float] = None
    interval: Optional[tuple] = None


def period3_witness(d: float, t: Optional[float] = None, grid: int = PERIOD3_GRID,
                    lo: Optional[float] = None, hi: Optional[float] = None) -> Period3Witness:
    """Sign change of ``h^3(r) - r`` at a point that is not fixed by ``h``.

    With ``t=None`` the map is the invariant-curve map ``g(r) = r e^{d/2 - r}``
    scanned over ``(1, d/2)``; otherwise ``h = f_t`` scanned over
    ``(lo, hi)`` (default ``(0.01, d)``).
    """
    if d <= 0:
        raise DomainError("d must be positive")
    if t is None:
        half = d / 2
        h = lambda r: r * np.exp(half - r)
        lo = 1.0 if lo is None else lo
        hi = half if hi is None else hi
    else:
        cfg = MapConfig(d, t)
        h = lambda r: f_map(r, cfg)
        lo = 0.01 if lo is None else lo
        hi = d if hi is None else hi
    if not hi > lo:
        return Period3Witness(False, interval=(lo, hi))
    # open interval: drop the right end, which is the fixed point d/2 for g
    xs = np.linspace(lo, hi, grid + 1)[:-1]
    F = lambda r: h(h(h(r))) - r
    vals = F(xs)
    for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
        a, b = float(xs[i]), float(xs[i + 1])
        root = a if vals[i] == 0 else brentq(lambda r: float(F(r)), a, b, xtol=1e-14)
        if abs(float(h(root)) - root) > 1e-7 * max(1.0, root):
            return Period3Witness(True, (a, b), root, (lo, hi))
    return Period3Witness(False, interval=(lo, hi))


def rmsa_period(d: float, r_m1: float, r_0: float, transient: int = TRANSIENT,
                max_period: int = MAX_PERIOD, tol: float = CYCLE_TOL) -> Optional[int]:
    orbit = iterate_reduced(r_m1, r_0, d, transient + 2 * max_period + 1).values
    return minimal_period(orbit[-(2 * max_period + 1):], tol, max_period)


def odd_period_exclusion(d: float, r_m1: float, r_0: float,
                         max_period: int = MAX_PERIOD, transient: int = TRANSIENT) -> dict:
    """Detected minimal period of the orbit and whether odd periods are ruled out.

    Off the invariant curve only even periods can occur; ``consistent`` is
    False if an odd period shows up there.
    """
    t0 = compute_t0(r_m1, r_0)
    applies = not on_invariant_curve(d, t0)
    q = rmsa_period(d, r_m1, r_0, transient, max_period)
    consistent = True if (q is None or not applies) else q % 2 == 0
    return {"d": d, "r_m1": r_m1, "r0": r_0, "t0": t0, "period": q if q else "none",
            "exclusion_applies": applies, "consistent": consistent,
            "max_period": max_period, "transient": transient}


def embed_first_order(c0: float, c1: float, u0: float, n_steps: int) -> dict:
    """Orbit of ``u[n+1] = u[n] exp(c_n - u[n])`` with ``c`` alternating
    ``(c0, c1)`` against the second-order orbit seeded ``(u0, u1)``, with
    ``d = c0 + c1``.

    ``max_rel_diff`` compares the two orbits as computed; on chaotic orbits
    rounding makes them drift apart.  ``step_rel`` applies one second-order
    step to consecutive first-order values and is immune to that drift.
    """
    if u0 <= 0:
        raise DomainError("u0 must be positive")
    d = c0 + c1
    u = [float(u0)]
    for n in range(n_steps + 1):
        u.append(u[-1] * capped_exp((c0, c1)[n % 2] - u[-1], index=n))
    r = iterate_reduced(u[0], u[1], d, n_steps).values
    u = np.array(u[:len(r)])
    rel = float(np.max(np.abs(u - r) / np.maximum(np.abs(u), 1e-300)))
    step = u[:-2] * np.exp(d - u[:-2] - u[1:-1])
    step_rel = float(np.max(np.abs(step - u[2:]) / np.maximum(u[2:], 1e-300))) if len(step) else 0.0
    t0 = compute_t0(u[0], u[1])
    return {"c0": c0, "c1": c1, "d": d, "u0": u0, "steps": n_steps,
            "max_rel_diff": rel, "step_rel": step_rel, "on_invariant_curve": on_invariant_curve(d, t0),
            "first_order": u.tolist(), "second_order": r.tolist()}
