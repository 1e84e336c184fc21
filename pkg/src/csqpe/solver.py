"""Basis-pursuit denoising with real unknowns and complex data.

Solves min ||s||_1 over real s subject to ||F s - y||_2 <= b by stacking
real and imaginary parts of the measurement rows.  Two independent
backends are provided: an operator-splitting primary solver (splitting
variables for the l1 term and for the residual-ball constraint, with a
cached small-Gram factorization for the least-squares step) and a
primal-dual first-order reference used for cross-validation.  Both
certify optimality through the same duality gap

    lower(lam) = max(+-y'lam) - b ||lam||_2   for  ||A'lam||_inf <= 1,

so a returned "optimal" status carries a verified bound on suboptimality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from csqpe.errors import ConfigurationError
from csqpe.fourier import ShiftedFourierOp

FEAS_RTOL = 1e-6   # multiplicative slack on the constraint radius
FEAS_ATOL = 1e-9   # absolute slack, relevant for radius ~ 0
MAX_N = 100_000


@dataclass(frozen=True)
class BpdnProblem:
    """One constrained l1 problem over a row-sampled shifted Fourier operator."""

    op: ShiftedFourierOp
    y: np.ndarray
    radius: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        rows = self.op.row_indices
        if y.shape != rows.shape:
            raise ConfigurationError(
                f"data length {y.shape} does not match operator rows {rows.shape}"
            )
        if self.radius < 0:
            raise ConfigurationError(f"radius must be >= 0, got {self.radius}")
        if self.op.n > MAX_N:
            raise ConfigurationError(f"signal length {self.op.n} exceeds budget {MAX_N}")
        object.__setattr__(self, "y", y)

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Real 2m x N matrix [Re A; Im A] and stacked data [Re y; Im y]."""
        a = self.op.matrix()
        return np.vstack([a.real, a.imag]), np.concatenate([self.y.real, self.y.imag])


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 5000
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    penalty: float = 1.0
    relax: float = 1.6
    gap_tol: float = 1e-7
    check_every: int = 10
    max_penalty_updates: int = 30

    def __post_init__(self):
        if min(self.max_iter, self.check_every) < 1 or min(
            self.abs_tol, self.rel_tol, self.penalty, self.gap_tol
        ) <= 0:
            raise ConfigurationError("solver options must be positive")
        if not 0.0 < self.relax < 2.0:
            raise ConfigurationError("relax must be in (0, 2)")

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverOptions":
        return cls(**d) if d else cls()


@dataclass(frozen=True)
class BpdnSolution:
    s: np.ndarray
    objective: float
    residual_norm: float
    status: str  # optimal | infeasible | max_iter
    iterations: int
    gap: float
    primal_residual: float
    dual_residual: float


def dual_lower_bound(at: np.ndarray, yt: np.ndarray, radius: float, lam: np.ndarray) -> float:
    """Certified lower bound on the optimum from any dual candidate."""
    den = float(np.max(np.abs(at.T @ lam), initial=0.0))
    if den == 0.0:
        return 0.0
    lamf = lam / max(1.0, den)
    ip = float(yt @ lamf)
    return max(ip, -ip) - radius * float(np.linalg.norm(lamf))


def _feasible(residual: float, radius: float) -> bool:
    return residual <= radius * (1.0 + FEAS_RTOL) + FEAS_ATOL


def _least_squares_residual(at: np.ndarray, yt: np.ndarray) -> float:
    sol, _, _, _ = np.linalg.lstsq(at, yt, rcond=None)
    return float(np.linalg.norm(at @ sol - yt))


def solve_bpdn(problem: BpdnProblem, opts: SolverOptions | None = None) -> BpdnSolution:
    """Primary operator-splitting solve of one BPDN instance.

    Splits (s, w, z) with w = s carrying the l1 term and z = As - y
    confined to the constraint ball; the s-step solves a fixed normal
    system through a cached Cholesky factor of the (small) row Gram
    matrix, so penalty rescaling never refactorizes.  The penalty is
    rebalanced a bounded number of times and then frozen, which keeps the
    iteration provably convergent.  Feasible candidates are harvested
    from both the thresholded iterate and the least-squares iterate
    scaled onto the ball, and the best one is returned once its duality
    gap clears `gap_tol`.
    """
    opts = opts or SolverOptions()
    at, yt = problem.stacked()
    radius = float(problem.radius)
    sols = _admm_batch(at[None], yt[None], np.array([radius]), opts)
    return sols[0]


def solve_bpdn_batch(
    ops: list[ShiftedFourierOp] | np.ndarray,
    ys: np.ndarray,
    radius,
    opts: SolverOptions | None = None,
) -> list[BpdnSolution]:
    """Solve many same-shape instances in lockstep (used by the shift sweep).

    `ops` may be a list of operators sharing (n, rows-length) or a
    prestacked real array of shape (B, 2m, N).  Results match per-instance
    solve_bpdn up to numerical roundoff in the reduction order.
    """
    opts = opts or SolverOptions()
    if isinstance(ops, np.ndarray):
        ats = ops
    else:
        ats = np.stack([op.stacked_real() for op in ops])
    ys = np.asarray(ys)
    if np.iscomplexobj(ys):
        yts = np.concatenate([ys.real, ys.imag], axis=1)
    else:
        yts = ys
    b = ats.shape[0]
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (b,)).astype(float)
    return _admm_batch(ats, yts, radius, opts)


def _admm_batch(ats: np.ndarray, yts: np.ndarray, radius: np.ndarray, opts: SolverOptions):
    b, m, n = ats.shape
    at_t = np.swapaxes(ats, 1, 2)

    def bmv(mat, v):
        return np.einsum("bij,bj->bi", mat, v, optimize=True)

    norm_y = np.linalg.norm(yts, axis=1)
    trivial = norm_y <= radius
    # structural infeasibility: even the least-squares fit misses the ball
    ls_resid = np.array([_least_squares_residual(ats[i], yts[i]) for i in range(b)])
    infeasible = ls_resid > radius + 1e-9

    gram = ats @ at_t
    inv = np.linalg.inv(np.eye(m)[None] + gram)

    w = np.zeros((b, n))
    z = np.zeros((b, m))
    u1 = np.zeros((b, n))
    u2 = np.zeros((b, m))
    rho = np.full(b, opts.penalty)
    n_adapt = np.zeros(b, dtype=int)
    best = np.zeros((b, n))
    best_obj = np.full(b, np.inf)
    gap = np.full(b, np.inf)
    prim = np.full(b, np.inf)
    dual = np.full(b, np.inf)
    iters = np.zeros(b, dtype=int)
    done = trivial | infeasible
    relax = opts.relax

    for it in range(1, opts.max_iter + 1):
        active = ~done
        if not active.any():
            break
        rhs = (w - u1) + bmv(at_t, yts + z - u2)
        s = rhs - bmv(at_t, bmv(inv, bmv(ats, rhs)))
        a_s = bmv(ats, s)
        s_r = relax * s + (1 - relax) * w
        a_s_r = relax * a_s + (1 - relax) * (z + yts)
        w_old, z_old = w, z
        g = s_r + u1
        w_new = np.sign(g) * np.maximum(np.abs(g) - (1.0 / rho)[:, None], 0.0)
        v = a_s_r - yts + u2
        nv = np.linalg.norm(v, axis=1)
        shrink = np.where(nv <= radius, 1.0, radius / np.maximum(nv, 1e-300))
        z_new = v * shrink[:, None]
        mask = active[:, None]
        w = np.where(mask, w_new, w)
        z = np.where(mask, z_new, z)
        u1 = np.where(mask, u1 + s_r - w, u1)
        u2 = np.where(mask, u2 + a_s_r - yts - z, u2)
        iters[active] = it

        if it % opts.check_every == 0 or it == opts.max_iter:
            # candidate 1: the thresholded iterate
            resid_w = np.linalg.norm(bmv(ats, w) - yts, axis=1)
            obj_w = np.abs(w).sum(axis=1)
            ok = active & (resid_w <= radius * (1 + FEAS_RTOL) + FEAS_ATOL) & (obj_w < best_obj)
            best_obj = np.where(ok, obj_w, best_obj)
            best = np.where(ok[:, None], w, best)
            # candidate 2: least-squares iterate scaled onto the ball
            qa = np.einsum("bi,bi->b", a_s, a_s)
            qb = -2.0 * np.einsum("bi,bi->b", a_s, yts)
            qc = np.einsum("bi,bi->b", yts, yts) - radius**2
            disc = qb * qb - 4.0 * qa * qc
            has_root = (qa > 0) & (disc >= 0)
            sq = np.sqrt(np.maximum(disc, 0.0))
            t1 = (-qb - sq) / np.maximum(2 * qa, 1e-300)
            t2 = (-qb + sq) / np.maximum(2 * qa, 1e-300)
            t_best = np.where((t1 <= 0) & (0 <= t2), 0.0, np.where(np.abs(t1) < np.abs(t2), t1, t2))
            obj_s = np.abs(t_best) * np.abs(s).sum(axis=1)
            ok2 = active & has_root & (obj_s < best_obj)
            best_obj = np.where(ok2, obj_s, best_obj)
            best = np.where(ok2[:, None], t_best[:, None] * s, best)
            # duality gap from the running multiplier of the ball constraint
            lam = rho[:, None] * u2
            den = np.max(np.abs(bmv(at_t, lam)), axis=1)
            lamf = lam / np.maximum(den, 1.0)[:, None]
            ip = np.einsum("bi,bi->b", yts, lamf)
            lower = np.maximum(ip, -ip) - radius * np.linalg.norm(lamf, axis=1)
            gap = np.where(active & np.isfinite(best_obj), best_obj - lower, gap)
            # residuals (for diagnostics and the secondary stop)
            r_n = np.sqrt(
                np.linalg.norm(s_r - w, axis=1) ** 2 + np.linalg.norm(a_s_r - yts - z, axis=1) ** 2
            )
            d_n = rho * np.sqrt(
                np.linalg.norm(w - w_old, axis=1) ** 2
                + np.linalg.norm(bmv(at_t, z - z_old), axis=1) ** 2
            )
            prim = np.where(active, r_n, prim)
            dual = np.where(active, d_n, dual)
            scale_p = np.sqrt(m + n) * opts.abs_tol + opts.rel_tol * np.maximum(
                np.sqrt(np.linalg.norm(s, axis=1) ** 2 + np.linalg.norm(a_s, axis=1) ** 2), 1e-12
            )
            scale_d = np.sqrt(n) * opts.abs_tol + opts.rel_tol * rho * np.sqrt(
                np.linalg.norm(u1, axis=1) ** 2 + np.linalg.norm(bmv(at_t, u2), axis=1) ** 2
            )
            converged = active & np.isfinite(best_obj) & (
                (gap <= opts.gap_tol * (1.0 + best_obj)) | ((r_n <= scale_p) & (d_n <= scale_d))
            )
            done |= converged
            active = ~done
            # bounded penalty rebalancing, then frozen
            can = active & (n_adapt < opts.max_penalty_updates)
            up = can & (r_n > 10 * d_n)
            dn = can & (d_n > 10 * r_n)
            n_adapt = n_adapt + up + dn
            rho = np.where(up, rho * 2, np.where(dn, rho / 2, rho))
            dual_scale = np.where(up, 0.5, np.where(dn, 2.0, 1.0))[:, None]
            u1 = u1 * dual_scale
            u2 = u2 * dual_scale

    out = []
    for i in range(b):
        if trivial[i]:
            s_i = np.zeros(n)
            out.append(
                BpdnSolution(s_i, 0.0, float(norm_y[i]), "optimal", 0, 0.0, 0.0, 0.0)
            )
            continue
        if infeasible[i]:
            s_i = np.zeros(n)
            out.append(
                BpdnSolution(s_i, 0.0, float(ls_resid[i]), "infeasible", 0, np.inf, np.inf, np.inf)
            )
            continue
        have_best = np.isfinite(best_obj[i])
        s_i = best[i].copy() if have_best else w[i].copy()
        resid = float(np.linalg.norm(ats[i] @ s_i - yts[i]))
        status = "optimal" if (done[i] and have_best and _feasible(resid, radius[i])) else "max_iter"
        out.append(
            BpdnSolution(
                s=s_i,
                objective=float(np.abs(s_i).sum()),
                residual_norm=resid,
                status=status,
                iterations=int(iters[i]),
                gap=float(gap[i]),
                primal_residual=float(prim[i]),
                dual_residual=float(dual[i]),
            )
        )
    return out


def reference_solve_bpdn(problem: BpdnProblem, tol: float = 1e-8) -> BpdnSolution:
    """Independent primal-dual cross-check backend (Chambolle-Pock style).

    Columns are normalized to unit length (a diagonal preconditioner that
    keeps the l1 prox closed-form as a weighted soft threshold); primal
    and dual steps use the spectral norm of the scaled matrix.  Run to a
    tight duality-gap tolerance; restricted to desk-scale N.
    """
    if problem.op.n > 2048:
        raise ConfigurationError("reference solver is restricted to N <= 2048")
    at, yt = problem.stacked()
    radius = float(problem.radius)
    m, n = at.shape
    if np.linalg.norm(yt) <= radius:
        return BpdnSolution(np.zeros(n), 0.0, float(np.linalg.norm(yt)), "optimal", 0, 0.0, 0.0, 0.0)
    ls_resid = _least_squares_residual(at, yt)
    if ls_resid > radius + 1e-9:
        return BpdnSolution(np.zeros(n), 0.0, ls_resid, "infeasible", 0, np.inf, np.inf, np.inf)

    col = np.linalg.norm(at, axis=0)
    col[col == 0] = 1.0
    k = at / col
    lip = float(np.linalg.norm(k, 2))
    tau = 0.99 / lip
    sig = 0.99 / lip
    x = np.zeros(n)
    xb = x.copy()
    p = np.zeros(m)
    max_iter = 200_000
    best = None
    best_obj = np.inf
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        v = p + sig * (k @ xb)
        wv = v / sig
        dw = wv - yt
        ndw = float(np.linalg.norm(dw))
        proj = yt + (dw if ndw <= radius else dw * (radius / ndw))
        p = v - sig * proj
        x_old = x
        g = x - tau * (k.T @ p)
        x = np.sign(g) * np.maximum(np.abs(g) - tau / col, 0.0)
        xb = 2 * x - x_old
        if it % 50 == 0:
            cand = x / col
            resid = float(np.linalg.norm(at @ cand - yt))
            if _feasible(resid, radius):
                obj = float(np.abs(cand).sum())
                if obj < best_obj:
                    best_obj, best = obj, cand.copy()
            if best is not None:
                lower = dual_lower_bound(at, yt, radius, p)
                gap = best_obj - lower
                if gap <= tol * (1.0 + best_obj):
                    resid_b = float(np.linalg.norm(at @ best - yt))
                    return BpdnSolution(
                        best, best_obj, resid_b, "optimal", it, float(gap), 0.0, 0.0
                    )
    cand = best if best is not None else x / col
    resid = float(np.linalg.norm(at @ cand - yt))
    return BpdnSolution(
        cand, float(np.abs(cand).sum()), resid, "max_iter", it, float(gap), np.inf, np.inf
    )
