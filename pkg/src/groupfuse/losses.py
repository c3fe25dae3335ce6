"""Pointwise loss machinery: check-function values, proximal maps, gradients.

The quantile check function is rho_tau(u) = u * (tau - 1{u < 0}); tau = 0.5
gives half the absolute deviation.  The solver only needs values, the LS
gradient, and the two proximal maps, so no autodiff surface is exposed.
"""

from __future__ import annotations

import numpy as np

from .model import GroupedCoefficients, GroupedDesign, check_shapes


def _validate_tau(tau) -> None:
    arr = np.asarray(tau)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError(f"tau must lie in (0, 1), got {tau}")


def check_value(u, tau: float):
    """Quantile check function, elementwise; scalar in, scalar out.

    The tie at u = 0 follows the strict convention 1{u < 0}, which changes
    nothing numerically (the value is 0 either way) but fixes the subgradient
    choice used elsewhere.
    """
    _validate_tau(tau)
    arr = np.asarray(u, dtype=float)
    out = arr * (tau - (arr < 0))
    return float(out) if np.isscalar(u) or arr.ndim == 0 else out


def prox_check(v, alpha: float, tau: float):
    """Proximal map of the check function: argmin_z rho_tau(z) + (z-v)^2/(2*alpha).

    Closed form: shift down by alpha*tau above the dead zone, up by
    alpha*(1-tau) below it, zero inside [-alpha*(1-tau), alpha*tau].
    Both dead-zone boundaries are treated as closed.
    """
    if not np.all(np.asarray(alpha) > 0):
        raise ValueError("alpha must be positive")
    _validate_tau(tau)
    arr = np.asarray(v, dtype=float)
    hi = alpha * tau
    lo = -alpha * (1.0 - tau)
    out = np.where(arr > hi, arr - hi, np.where(arr < lo, arr - lo, 0.0))
    return float(out) if np.isscalar(v) or arr.ndim == 0 else out


def _indicator_integral(x, y):
    # closed form of int_0^y (1{x <= v} - 1{x <= 0}) dv, by case analysis on
    # the sign ordering of 0, y, x
    return np.where(x > 0, np.maximum(y - x, 0.0), np.maximum(x - y, 0.0))


def knight_identity_gap(x, y, tau: float):
    """|LHS - RHS| of the exact check-function decomposition

        rho_tau(x - y) - rho_tau(x) = y (1{x<0} - tau)
                                      + int_0^y (1{x<=v} - 1{x<=0}) dv,

    with the integral evaluated in closed form.  Exposed purely as a
    self-check of the case analysis; the gap must vanish to rounding error
    for all finite inputs.
    """
    _validate_tau(tau)
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    lhs = check_value(xa - ya, tau) - check_value(xa, tau)
    rhs = ya * ((xa < 0) - tau) + _indicator_integral(xa, ya)
    out = np.abs(lhs - rhs)
    scalar = np.isscalar(x) and np.isscalar(y)
    return float(out) if scalar or out.ndim == 0 else out


def ls_residual_gradient(design: GroupedDesign,
                         beta: GroupedCoefficients) -> np.ndarray:
    """Gradient of sum_i (y_i - x_i' beta)^2, i.e. -2 X'(y - X beta)."""
    check_shapes(design, beta)
    return -2.0 * design.X.T @ (design.y - design.X @ beta.flat)
