"""Shared test oracles, independent of the library code paths they check."""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from groupfuse import GroupedDesign, ProblemSpec, fit
from groupfuse.detection import score_detection
from groupfuse.simulation import ScenarioSpec, generate_instance
from groupfuse.solver import default_schedules


def ternary_min(f, lo: float, hi: float, iters: int = 160) -> float:
    """Argmin of a convex scalar function on [lo, hi].

    Runs in extended precision: double precision can only localize the
    minimum of a quadratic to about sqrt(eps) ~ 1.5e-8, which is exactly the
    accuracy the oracle comparisons need to beat.
    """
    lo = np.longdouble(lo)
    hi = np.longdouble(hi)
    three = np.longdouble(3.0)
    for _ in range(iters):
        t1 = lo + (hi - lo) / three
        t2 = hi - (hi - lo) / three
        if f(t1) <= f(t2):
            hi = t2
        else:
            lo = t1
    return float((lo + hi) / np.longdouble(2.0))


def ternary_min_batch(f, lo: np.ndarray, hi: np.ndarray,
                      iters: int = 120) -> np.ndarray:
    """Vectorized ternary search; ``f`` maps an array to objective values."""
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    for _ in range(iters):
        t1 = lo + (hi - lo) / 3.0
        t2 = hi - (hi - lo) / 3.0
        left = f(t1) <= f(t2)
        hi = np.where(left, t2, hi)
        lo = np.where(left, lo, t1)
    return 0.5 * (lo + hi)


def knight_integral_quad(x: float, y: float) -> float:
    """Adaptive quadrature of int_0^y (1{x<=v} - 1{x<=0}) dv."""
    indicator = lambda v: float(x <= v) - float(x <= 0.0)
    interior = min(0.0, y) < x < max(0.0, y)
    val, _ = quad(indicator, 0.0, y,
                  points=[x] if interior else None, limit=200)
    return val


def central_differences(f, x: np.ndarray) -> np.ndarray:
    """Gradient oracle with per-coordinate steps 1e-6 * (1 + |x_k|)."""
    grad = np.empty_like(x, dtype=float)
    for k in range(x.size):
        h = 1e-6 * (1.0 + abs(x[k]))
        e = np.zeros_like(x)
        e[k] = h
        grad[k] = (f(x + e) - f(x - e)) / (2.0 * h)
    return grad


TINY_SHAPES = ((1, 1), (2, 1), (3, 1), (1, 2), (1, 3))


def random_tiny_instance(rng: np.random.Generator,
                         loss: str, tau: float, q: int,
                         adaptive: bool) -> tuple[GroupedDesign, ProblemSpec]:
    """A random instance with n <= 6 and g*p <= 3 plus a matching spec."""
    g, p = TINY_SHAPES[rng.integers(len(TINY_SHAPES))]
    n = int(rng.integers(4, 7))
    X = rng.standard_normal((n, g * p))
    beta_true = rng.uniform(-2.0, 2.0, g * p)
    y = X @ beta_true + 0.5 * rng.standard_normal(n)
    design = GroupedDesign(X=X, y=y, g=g, p=p)
    lam = float(rng.uniform(0.1, 3.0)) / n
    if adaptive:
        pilot = fit(design, ProblemSpec(loss=loss, tau=tau, q=q, lam=lam))
        spec = ProblemSpec(loss=loss, tau=tau, q=q, lam=lam,
                           weight_mode="adaptive", gamma=1.0,
                           pilot=pilot.beta)
    else:
        spec = ProblemSpec(loss=loss, tau=tau, q=q, lam=lam)
    return design, spec


def heavy_schedule_misscls(args) -> int:
    """Worker for the misclassification-rate gate: one fused quantile fit."""
    n, seed, m, cfg = args
    rng = np.random.default_rng((seed, m))
    spec = ScenarioSpec(p=1, g=n, error_dist="gaussian", changes=2,
                        seed=seed, M=1)
    design, _, truth = generate_instance(spec, rng)
    lam_heavy, _ = default_schedules(n, "adaptive")
    result = fit(design, ProblemSpec(loss="quantile", tau=0.5, q=2,
                                     lam=lam_heavy), cfg)
    _, _, misscls = score_detection(result.detected_set, truth)
    return misscls
