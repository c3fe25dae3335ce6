"""Convex solver for fused-group regression.

Minimizes  loss(y - X b) + n * lam * sum_{j=2}^g w_j ||b_j - b_{j-1}||_q
by operator splitting (ADMM) on the successive-difference operator D.

For the LS loss the quadratic is absorbed exactly into the b-update and only
the difference blocks are mirrored (z = D b); for the quantile loss a second
mirror carries the residuals so the check function enters through its exact
prox.  The two constraint blocks run at different augmented-Lagrangian rates
(rho for the residuals, c * rho for the differences, c set from the penalty
scale), which keeps the dual variables O(1) even when the per-pair penalty
weights are large; the ratio c is fixed per fit so the cached factorization
of the b-update system survives residual-balancing changes to rho.

The recorded merit per outer iteration is the true objective of the
incumbent (best-so-far) iterate, which is also what gets returned.

A dense grid-search oracle for tiny instances and the default tuning
schedules live here too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from . import detection, penalties
from .model import (DimensionMismatchError, FitResult, GroupedCoefficients,
                    GroupedDesign, ProblemSpec)
from .losses import prox_check

RHO_MIN = 1e-3
RHO_MAX = 1e3
# residual balancing fires at most this often: on piecewise-linear problems
# every rescaling of the duals restarts the tail of the iteration
ADAPT_EVERY = 50


class SolverError(RuntimeError):
    """Hard numerical failure inside the splitting loop."""


@dataclass(frozen=True)
class SolverConfig:
    """Splitting-solver knobs.

    ``rho`` seeds the augmented-Lagrangian rate (residual balancing adapts
    it by factors of 2 within [1e-3, 1e3] unless ``adapt_rho`` is off),
    ``tol_abs``/``tol_rel`` feed the standard primal/dual residual stopping
    rule, and ``fusion_tol`` is the post-hoc threshold used to read the
    detected difference set off the solution.  ``warm_start`` accepts any
    coefficient vector; vectors returned by :func:`fit` carry the full
    splitting state and restart at the fixed point.
    """

    rho: float = 1.0
    max_iter: int = 10000
    tol_abs: float = 1e-8
    tol_rel: float = 1e-6
    fusion_tol: float = detection.DEFAULT_FUSION_TOL
    warm_start: GroupedCoefficients | None = None
    adapt_rho: bool = True
    over_relax: float = 1.5

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol_abs <= 0 or self.tol_rel <= 0:
            raise ValueError("tolerances must be positive")
        if self.fusion_tol < 0:
            raise ValueError("fusion_tol must be nonnegative")
        if not 0.5 <= self.over_relax <= 2.0:
            raise ValueError("over_relax must lie in [0.5, 2.0]")


@dataclass(frozen=True, eq=False)
class _WarmState:
    """Full splitting state attached to solver output for exact restarts."""

    zr: np.ndarray | None
    zd: np.ndarray
    ur: np.ndarray | None
    ud: np.ndarray
    rho: float
    problem_key: tuple
    stop_primal: float
    stop_dual: float
    converged: bool


class DiffOperator:
    """Implicit ((g-1)*p) x (g*p) successive-difference operator."""

    def __init__(self, g: int, p: int):
        if g < 1 or p < 1:
            raise ValueError("g and p must be positive")
        self.g = g
        self.p = p
        self.rows = (g - 1) * p
        self.cols = g * p

    def apply(self, v: np.ndarray) -> np.ndarray:
        B = np.asarray(v).reshape(self.g, self.p)
        return (B[1:] - B[:-1]).ravel()

    def adjoint(self, d: np.ndarray) -> np.ndarray:
        Dm = np.asarray(d).reshape(self.g - 1, self.p)
        out = np.zeros((self.g, self.p))
        out[:-1] -= Dm
        out[1:] += Dm
        return out.ravel()

    def dense(self) -> np.ndarray:
        first_diff = np.zeros((self.g - 1, self.g))
        idx = np.arange(self.g - 1)
        first_diff[idx, idx] = -1.0
        first_diff[idx, idx + 1] = 1.0
        return np.kron(first_diff, np.eye(self.p))

    def gram(self) -> np.ndarray:
        D = self.dense()
        return D.T @ D


def _factorize(M: np.ndarray):
    try:
        chol = scipy.linalg.cho_factor(M)
        return lambda rhs: scipy.linalg.cho_solve(chol, rhs)
    except scipy.linalg.LinAlgError:
        # singular system (e.g. an all-zero design); the minimum-norm
        # solution still minimizes the b-subproblem
        pinv = np.linalg.pinv(M)
        return lambda rhs: pinv @ rhs


def _problem_key(design: GroupedDesign, spec: ProblemSpec,
                 kappa: np.ndarray) -> tuple:
    return (spec.loss, spec.tau if spec.loss == "quantile" else None,
            spec.q, design.n, design.g, design.p,
            float(kappa.sum()), float(kappa.max(initial=0.0)))


class _Incumbent:
    """Track the best true objective and the iterate that achieved it."""

    def __init__(self):
        self.obj = np.inf
        self.beta = None
        self.zd = None
        self.trace: list[float] = []

    def seed(self, obj: float, beta: np.ndarray, zd: np.ndarray) -> None:
        self.obj = obj
        self.beta = beta.copy()
        self.zd = zd.copy()

    def update(self, obj: float, beta: np.ndarray, zd: np.ndarray) -> None:
        if obj < self.obj:
            self.obj = obj
            self.beta = beta.copy()
            self.zd = zd.copy()
        self.trace.append(self.obj)


def _assemble(design, cfg, inc: _Incumbent, state: _WarmState,
              converged: bool, iterations: int, rnorm: float,
              snorm: float) -> FitResult:
    g, p = design.g, design.p
    beta_gc = GroupedCoefficients.from_flat(inc.beta, g, p)
    object.__setattr__(beta_gc, "_warm_state", state)
    detected = detection.detect_from_diffs(
        inc.zd.reshape(g - 1, p) if g > 1 else np.zeros((0, p)),
        beta_gc.stacked(), cfg.fusion_tol)
    return FitResult(
        beta=beta_gc,
        detected_set=tuple(detected),
        objective_trace=tuple(inc.trace),
        converged=converged,
        iterations=iterations,
        primal_residual=float(rnorm),
        dual_residual=float(snorm),
        overparameterized=design.r > design.n,
    )


def _warm_arrays(cfg, key, n: int, md: int, need_zr: bool):
    """Initial (beta0, zr, zd, ur, ud, rho, donor) from the warm-start field.

    ``rho`` is None unless a full state matching this problem is attached;
    ``donor`` is that state when it was converged, enabling restart
    acceptance at the residual levels already accepted once.
    """
    donor = None
    if cfg.warm_start is None:
        return None, None, None, None, None, None, donor
    ws = cfg.warm_start
    beta0 = ws.flat
    state = getattr(ws, "_warm_state", None)
    if state is not None and state.zd.shape == (md,) and \
            (not need_zr or (state.zr is not None and state.zr.shape == (n,))):
        same_problem = state.problem_key == key
        if same_problem and state.converged:
            donor = state
        zr = state.zr.copy() if state.zr is not None else None
        rho = min(max(state.rho, RHO_MIN), RHO_MAX) if same_problem else None
        return beta0, zr, state.zd.copy(), \
            (state.ur.copy() if state.ur is not None else None), \
            state.ud.copy(), rho, donor
    return beta0, None, None, None, None, None, donor


def _accepts(rnorm, snorm, eps_pri, eps_dual, donor) -> bool:
    if rnorm <= eps_pri and snorm <= eps_dual:
        return True
    # restarting from a converged state of the same problem: accept residual
    # levels comparable to the ones already accepted at that state
    if donor is not None:
        return (rnorm <= max(eps_pri, 2.0 * donor.stop_primal)
                and snorm <= max(eps_dual, 2.0 * donor.stop_dual))
    return False


def _fit_ls(design: GroupedDesign, spec: ProblemSpec, cfg: SolverConfig,
            kappa: np.ndarray) -> FitResult:
    n, g, p = design.n, design.g, design.p
    X, y = design.X, design.y
    Xt = np.ascontiguousarray(X.T)
    D = DiffOperator(g, p)
    md = D.rows
    alpha = cfg.over_relax
    key = _problem_key(design, spec, kappa)

    XtX2 = 2.0 * (Xt @ X)
    Xty2 = 2.0 * (Xt @ y)
    gram_d = D.gram()

    # large penalty weights need a comparable dual rate or the difference
    # duals crawl; the data-scale factor keeps rho dimensionless
    rho_scale = max(1.0, float(np.median(kappa)) if md else 1.0)

    beta0, _, zd, _, ud, state_rho, donor = _warm_arrays(cfg, key, n, md,
                                                         need_zr=False)
    rho = state_rho if state_rho is not None else cfg.rho * rho_scale
    if beta0 is None:
        zd = np.zeros(md)
        ud = np.zeros(md)
    elif zd is None:
        zd = D.apply(beta0)
        ud = np.zeros(md)

    solve = _factorize(XtX2 + rho * gram_d)
    sqrt_pri = np.sqrt(max(md, 1))
    sqrt_dual = np.sqrt(g * p)

    inc = _Incumbent()
    if beta0 is not None:
        # never return anything worse than the starting point
        resid0 = y - X @ beta0
        Db0 = D.apply(beta0)
        pen0 = float(kappa @ penalties.block_norms(
            Db0.reshape(g - 1, p), spec.q)) if md else 0.0
        inc.seed(float(resid0 @ resid0) + pen0, beta0, Db0)
    converged = False
    rnorm = snorm = 0.0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        beta = solve(Xty2 + rho * D.adjoint(zd - ud))
        if not np.all(np.isfinite(beta)):
            raise SolverError(f"non-finite iterate at iteration {it}")
        Db = D.apply(beta)
        Db_r = alpha * Db + (1.0 - alpha) * zd
        zd_old = zd
        if md:
            zd = penalties.prox_block_norms(
                (Db_r + ud).reshape(g - 1, p), kappa / rho, spec.q).ravel()
        ud = ud + (Db_r - zd)

        resid = y - X @ beta
        pen = float(kappa @ penalties.block_norms(
            Db.reshape(g - 1, p), spec.q)) if md else 0.0
        inc.update(float(resid @ resid) + pen, beta, zd)

        dzd = zd - zd_old
        pri = Db - zd
        rnorm = np.linalg.norm(pri)
        snorm = rho * np.linalg.norm(D.adjoint(dzd))
        db_norm = np.linalg.norm(Db)
        zd_norm = np.linalg.norm(zd)
        eps_pri = sqrt_pri * cfg.tol_abs + cfg.tol_rel * max(db_norm, zd_norm)
        grad_norm = np.linalg.norm(Xty2 - XtX2 @ beta)
        eps_dual = sqrt_dual * cfg.tol_abs + cfg.tol_rel * max(
            rho * np.linalg.norm(D.adjoint(ud)), grad_norm)
        if _accepts(rnorm, snorm, eps_pri, eps_dual, donor):
            converged = True
            break
        step_tol = sqrt_pri * cfg.tol_abs + \
            0.1 * cfg.tol_rel * max(zd_norm, db_norm, 1e-12)
        if rnorm <= step_tol and np.linalg.norm(dzd) <= step_tol:
            converged = True
            break

        if cfg.adapt_rho and it % ADAPT_EVERY == 0:
            new_rho = rho
            if rnorm > 10.0 * snorm and rnorm > eps_pri:
                new_rho = min(rho * 2.0, RHO_MAX * rho_scale)
            elif snorm > 10.0 * rnorm and snorm > eps_dual:
                new_rho = max(rho / 2.0, RHO_MIN * rho_scale)
            if new_rho != rho:
                ud = ud * (rho / new_rho)
                rho = new_rho
                solve = _factorize(XtX2 + rho * gram_d)

    state = _WarmState(zr=None, zd=zd, ur=None, ud=ud, rho=rho,
                       problem_key=key, stop_primal=float(rnorm),
                       stop_dual=float(snorm), converged=converged)
    return _assemble(design, cfg, inc, state, converged, it, rnorm, snorm)


def _fit_quantile(design: GroupedDesign, spec: ProblemSpec, cfg: SolverConfig,
                  kappa: np.ndarray) -> FitResult:
    n, g, p = design.n, design.g, design.p
    X, y = design.X, design.y
    Xt = np.ascontiguousarray(X.T)
    D = DiffOperator(g, p)
    md = D.rows
    alpha = cfg.over_relax
    tau = spec.tau
    key = _problem_key(design, spec, kappa)

    # rate ratio between the difference and residual blocks: the check
    # subgradients are O(1) while the difference duals are O(kappa)
    c_ratio = max(1.0, float(np.median(kappa)) / max(tau, 1.0 - tau)) if md else 1.0

    solve = _factorize(Xt @ X + c_ratio * D.gram())
    norm_y = np.linalg.norm(y)
    sqrt_pri = np.sqrt(n + md)
    sqrt_dual = np.sqrt(g * p)

    beta0, zr, zd, ur, ud, state_rho, donor = _warm_arrays(cfg, key, n, md,
                                                           need_zr=True)
    rho = state_rho if state_rho is not None else cfg.rho
    if beta0 is None:
        zr = y.copy()
        zd = np.zeros(md)
        ur = np.zeros(n)
        ud = np.zeros(md)
    elif zr is None:
        zr = y - X @ beta0
        zd = D.apply(beta0)
        ur = np.zeros(n)
        ud = np.zeros(md)

    inc = _Incumbent()
    if beta0 is not None:
        resid0 = y - X @ beta0
        Db0 = D.apply(beta0)
        pen0 = float(kappa @ penalties.block_norms(
            Db0.reshape(g - 1, p), spec.q)) if md else 0.0
        inc.seed(float(np.sum(resid0 * (tau - (resid0 < 0)))) + pen0,
                 beta0, Db0)
    converged = False
    rnorm = snorm = 0.0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        rho_d = rho * c_ratio
        rhs = Xt @ (y - zr - ur) + c_ratio * D.adjoint(zd - ud)
        beta = solve(rhs)
        if not np.all(np.isfinite(beta)):
            raise SolverError(f"non-finite iterate at iteration {it}")
        Xb = X @ beta
        Db = D.apply(beta)
        Xb_r = alpha * Xb + (1.0 - alpha) * (y - zr)
        Db_r = alpha * Db + (1.0 - alpha) * zd

        zr_old, zd_old = zr, zd
        zr = prox_check(y - Xb_r - ur, 1.0 / rho, tau)
        if md:
            zd = penalties.prox_block_norms(
                (Db_r + ud).reshape(g - 1, p), kappa / rho_d, spec.q).ravel()
        ur = ur + (Xb_r + zr - y)
        ud = ud + (Db_r - zd)

        pen = float(kappa @ penalties.block_norms(
            Db.reshape(g - 1, p), spec.q)) if md else 0.0
        resid = y - Xb
        inc.update(float(np.sum(resid * (tau - (resid < 0)))) + pen, beta, zd)

        pri_r = Xb + zr - y
        pri_d = Db - zd
        rnorm = np.sqrt(pri_r @ pri_r + pri_d @ pri_d)
        dzr = zr - zr_old
        dzd = zd - zd_old
        sdual = rho * (Xt @ dzr) - rho_d * D.adjoint(dzd)
        snorm = np.linalg.norm(sdual)

        ax_norm = np.sqrt(Xb @ Xb + Db @ Db)
        bz_norm = np.sqrt(zr @ zr + zd @ zd)
        eps_pri = sqrt_pri * cfg.tol_abs + \
            cfg.tol_rel * max(ax_norm, bz_norm, norm_y)
        dual_scale = max(rho * np.linalg.norm(Xt @ ur),
                         rho_d * np.linalg.norm(D.adjoint(ud)))
        eps_dual = sqrt_dual * cfg.tol_abs + cfg.tol_rel * dual_scale
        if _accepts(rnorm, snorm, eps_pri, eps_dual, donor):
            converged = True
            break
        step = np.sqrt(dzr @ dzr + dzd @ dzd)
        step_tol = sqrt_pri * cfg.tol_abs + \
            0.1 * cfg.tol_rel * max(bz_norm, norm_y, 1e-12)
        if rnorm <= step_tol and step <= step_tol:
            converged = True
            break

        if cfg.adapt_rho and it % ADAPT_EVERY == 0:
            new_rho = rho
            if rnorm > 10.0 * snorm and rnorm > eps_pri:
                new_rho = min(rho * 2.0, RHO_MAX)
            elif snorm > 10.0 * rnorm and snorm > eps_dual:
                new_rho = max(rho / 2.0, RHO_MIN)
            if new_rho != rho:
                scale = rho / new_rho
                ur *= scale
                ud *= scale
                rho = new_rho

    state = _WarmState(zr=zr, zd=zd, ur=ur, ud=ud, rho=rho,
                       problem_key=key, stop_primal=float(rnorm),
                       stop_dual=float(snorm), converged=converged)
    return _assemble(design, cfg, inc, state, converged, it, rnorm, snorm)


def fit(design: GroupedDesign, spec: ProblemSpec,
        cfg: SolverConfig | None = None) -> FitResult:
    """Compute a fused-group estimate for ``spec`` on ``design``.

    Returns a :class:`FitResult` whose objective is within solver tolerance
    of the global minimum (the problem is convex).  Non-convergence within
    ``max_iter`` is reported via ``converged=False``, not raised; NaNs in
    the iterates raise :class:`SolverError` naming the iteration.
    """
    if cfg is None:
        cfg = SolverConfig()
    g, p = design.g, design.p
    if spec.weight_mode == "adaptive" and (spec.pilot.g != g or spec.pilot.p != p):
        raise DimensionMismatchError(
            f"pilot shape ({spec.pilot.g}, {spec.pilot.p}) does not match "
            f"design ({g}, {p})"
        )
    if cfg.warm_start is not None and (cfg.warm_start.g != g
                                       or cfg.warm_start.p != p):
        raise DimensionMismatchError(
            f"warm start shape ({cfg.warm_start.g}, {cfg.warm_start.p}) "
            f"does not match design ({g}, {p})"
        )
    weights = spec.pair_weights(design.n, g)
    kappa = design.n * spec.lam * weights
    if spec.loss == "ls":
        return _fit_ls(design, spec, cfg, kappa)
    return _fit_quantile(design, spec, cfg, kappa)


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class GridSpec:
    """Controls for the tiny-instance grid-search oracle."""

    points: int = 21
    refine_points: int = 13
    obj_tol: float = 1e-7
    max_sweeps: int = 40

    def __post_init__(self):
        if self.points < 3 or self.refine_points < 3:
            raise ValueError("grids need at least 3 points per coordinate")


def _quantile_loss_only_fit(X: np.ndarray, y: np.ndarray, tau: float) -> np.ndarray:
    # classic LP form: minimize tau*1'u+ + (1-tau)*1'u-  s.t.  X b + u+ - u- = y
    n, d = X.shape
    c = np.concatenate([np.zeros(d), np.full(n, tau), np.full(n, 1.0 - tau)])
    A_eq = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * d + [(0, None)] * (2 * n)
    res = scipy.optimize.linprog(c, A_eq=A_eq, b_eq=y, bounds=bounds,
                                 method="highs")
    if not res.success:
        raise SolverError(f"loss-only quantile LP failed: {res.message}")
    return res.x[:d]


def _directions(d: int) -> np.ndarray:
    # nonzero sign patterns in {-1,0,1}^d, one per +/- pair
    dirs = []
    for code in range(1, 3 ** d):
        vec = []
        rem = code
        for _ in range(d):
            vec.append([0.0, 1.0, -1.0][rem % 3])
            rem //= 3
        first = next(v for v in vec if v != 0.0)
        if first > 0:
            dirs.append(vec)
    return np.asarray(dirs)


def brute_force_fit(design: GroupedDesign, spec: ProblemSpec,
                    grid: GridSpec | None = None) -> GroupedCoefficients:
    """Independent oracle: dense grid search plus line-search refinement.

    Guarded to g*p <= 3.  The box is centered on the loss-only fit; the grid
    stage locates the basin, bisection sweeps along coordinate and diagonal
    sign directions refine it, and a final simplex polish removes any
    residual kink stall.  No step shares code with :func:`fit`.
    """
    if grid is None:
        grid = GridSpec()
    g, p = design.g, design.p
    d = g * p
    if d > 3:
        raise ValueError(f"brute force limited to g*p <= 3, got {d}")
    X, y, n = design.X, design.y, design.n
    weights = spec.pair_weights(n, g)
    kappa = n * spec.lam * weights

    def objective_at(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        resid = y[None, :] - pts @ X.T
        if spec.loss == "quantile":
            loss = (resid * (spec.tau - (resid < 0))).sum(axis=1)
        else:
            loss = (resid ** 2).sum(axis=1)
        if g > 1:
            blocks = pts.reshape(pts.shape[0], g, p)
            diffs = blocks[:, 1:, :] - blocks[:, :-1, :]
            if spec.q == 1:
                norms = np.abs(diffs).sum(axis=2)
            else:
                norms = np.sqrt((diffs ** 2).sum(axis=2))
            loss = loss + norms @ kappa
        return loss

    if spec.loss == "quantile":
        center = _quantile_loss_only_fit(X, y, spec.tau)
    else:
        center = np.linalg.lstsq(X, y, rcond=None)[0]
    radius = 2.0 * (1.0 + max(1.0, np.abs(center).max()))

    def staged_min(fobj, mid: np.ndarray) -> tuple[np.ndarray, float]:
        dims = mid.size

        def grid_stage(at: np.ndarray, half: float, npts: int) -> np.ndarray:
            axes = [np.linspace(m - half, m + half, npts) for m in at]
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=-1)
            return pts[int(np.argmin(fobj(pts)))]

        best = grid_stage(mid, radius, grid.points)
        step = 2.0 * radius / (grid.points - 1)
        best = grid_stage(best, step, grid.refine_points)
        best_val = float(fobj(best[None, :])[0])

        def line_min(x0, v):
            lo, hi = -radius, radius
            for _ in range(60):
                t1 = lo + (hi - lo) / 3.0
                t2 = hi - (hi - lo) / 3.0
                if fobj((x0 + t1 * v)[None, :])[0] <= \
                        fobj((x0 + t2 * v)[None, :])[0]:
                    hi = t2
                else:
                    lo = t1
            x = x0 + 0.5 * (lo + hi) * v
            return x, float(fobj(x[None, :])[0])

        dirs = _directions(dims)
        for _ in range(grid.max_sweeps):
            sweep_start = best_val
            for v in dirs:
                cand, val = line_min(best, v)
                if val < best_val:
                    best, best_val = cand, val
            if sweep_start - best_val < grid.obj_tol:
                break

        polish = scipy.optimize.minimize(
            lambda x: float(fobj(x[None, :])[0]), best,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
        if polish.fun < best_val:
            best, best_val = polish.x, float(polish.fun)
        return best, best_val

    # the unconstrained search can stall on the kinks of exactly-fused
    # solutions, so every fusion pattern is also optimized inside its own
    # (smooth across the fused pairs) subspace and the overall best wins
    best_point = None
    best_val = np.inf
    for mask in range(2 ** (g - 1)):
        seg_of_group = np.zeros(g, dtype=int)
        for j in range(1, g):
            fused_pair = bool(mask & (1 << (j - 1)))
            seg_of_group[j] = seg_of_group[j - 1] + (0 if fused_pair else 1)
        n_seg = seg_of_group[-1] + 1
        embed = np.zeros((d, n_seg * p))
        for j in range(g):
            s = seg_of_group[j]
            embed[j * p:(j + 1) * p, s * p:(s + 1) * p] = np.eye(p)
        mid = np.linalg.lstsq(embed, center, rcond=None)[0]
        theta, val = staged_min(lambda TH: objective_at(TH @ embed.T), mid)
        if val < best_val:
            best_val = val
            best_point = embed @ theta

    return GroupedCoefficients.from_flat(best_point, g, p)


# ---------------------------------------------------------------------------
# tuning schedules


def default_schedules(n: int, stage: str) -> tuple[float, float]:
    """Default rate-schedule tuning values (lam, b) for sample size ``n``.

    ``stage="fused"`` gives lam = n^-1 (log n)^(1/2); ``stage="adaptive"``
    gives lam = n^-1 (log n)^(5/2).  Both share b = (log n / n)^(1/2).
    """
    if n < 2:
        raise ValueError("schedules need n >= 2")
    ln = np.log(n)
    b = float(np.sqrt(ln / n))
    if stage == "fused":
        return float(np.sqrt(ln) / n), b
    if stage in ("adaptive", "adaptive_fused"):
        return float(ln ** 2.5 / n), b
    raise ValueError(f"unknown stage {stage!r}")
