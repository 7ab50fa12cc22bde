"""Jointly concave maximum-likelihood estimator for linear LSNMs.

eta1(x) = psi(x)^T w1 and eta2(x) = -phi(x)^T w2 with w2 >= 0. The penalized
log-likelihood is maximized by alternating an exact weighted least-squares
update for w1 with bound-constrained L-BFGS-B steps for w2.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import (
    FittedLSNM,
    NaturalParams,
    SamplePair,
    clamp_variance,
    loglik_point,
    loglik_report,
)
from .features import SplineFeatureMap

# Floor on phi(x)^T w2 so eta2 stays strictly negative while the inner solver
# explores the boundary of the w2 >= 0 box.
ETA2_TINY = 1e-12


class SingularDesignError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class ConcaveFitConfig:
    delta: float = 1e-6
    max_outer_iters: int = 100
    loglik_tol: float = 1e-6
    inner_solver_iters: int = 20
    # joint quasi-Newton refinement after the alternating loop; the block
    # updates alone crawl along the ridge-flat direction of the collinear
    # spline-plus-bias design and stall short of the optimum
    refine: bool = True
    refine_maxiter: int = 2000

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.loglik_tol <= 0:
            raise ValueError("loglik_tol must be > 0")


@dataclass
class LinearLSNMWeights:
    """w1 unconstrained, w2 componentwise nonnegative with positive rows."""

    w1: np.ndarray
    w2: np.ndarray


def _natural_params(Psi, Phi, w1, w2):
    eta1 = Psi @ w1
    rows = Phi @ w2
    eta2 = -np.maximum(rows, ETA2_TINY)
    return eta1, eta2


def penalized_loglik(w1, w2, Psi, Phi, y, delta):
    eta1, eta2 = _natural_params(Psi, Phi, w1, w2)
    ll = float(np.sum(loglik_point(y, NaturalParams(eta1, eta2))))
    return ll - 0.5 * delta * (w1 @ w1 + w2 @ w2)


def loglik_grad_w(w1, w2, Psi, Phi, y, delta):
    """Gradient of the penalized log-likelihood w.r.t. (w1, w2)."""
    eta1, eta2 = _natural_params(Psi, Phi, w1, w2)
    mu = -eta1 / (2.0 * eta2)
    var = -1.0 / (2.0 * eta2)
    dl_deta1 = y - mu
    dl_deta2 = y * y - mu * mu - var
    active = (Phi @ w2 > ETA2_TINY).astype(float)
    g1 = Psi.T @ dl_deta1 - delta * w1
    g2 = -Phi.T @ (dl_deta2 * active) - delta * w2
    return g1, g2


def loglik_hessian_w(w1, w2, Psi, Phi, y, delta=0.0):
    """Full (2D x 2D) Hessian of the log-likelihood w.r.t. (w1, w2).

    The natural-parameter Hessian per point does not depend on y, so this
    equals minus T times the empirical Fisher information when delta = 0.
    """
    eta1, eta2 = _natural_params(Psi, Phi, w1, w2)
    h11 = 1.0 / (2.0 * eta2)
    h12 = -eta1 / (2.0 * eta2 * eta2)
    h22 = eta1 * eta1 / (2.0 * eta2 ** 3) - 1.0 / (2.0 * eta2 * eta2)
    H11 = Psi.T @ (h11[:, None] * Psi)
    H12 = -Psi.T @ (h12[:, None] * Phi)
    H22 = Phi.T @ (h22[:, None] * Phi)
    D1, D2 = Psi.shape[1], Phi.shape[1]
    H = np.zeros((D1 + D2, D1 + D2))
    H[:D1, :D1] = H11
    H[:D1, D1:] = H12
    H[D1:, :D1] = H12.T
    H[D1:, D1:] = H22
    if delta:
        H -= delta * np.eye(D1 + D2)
    return H


def wls_update_w1(Psi: np.ndarray, y: np.ndarray, alpha: np.ndarray, delta: float):
    """Closed-form w1 update: (Psi^T diag(alpha) Psi + delta I)^{-1} Psi^T y.

    alpha holds the current per-point variances -1/(2 eta2(x_i)).
    """
    if np.any(alpha <= 0):
        raise ValueError("alpha must be strictly positive")
    D = Psi.shape[1]
    A = Psi.T @ (alpha[:, None] * Psi) + delta * np.eye(D)
    b = Psi.T @ y
    if delta == 0.0:
        rank = np.linalg.matrix_rank(A)
        if rank < D:
            raise SingularDesignError(
                f"normal matrix is rank deficient (rank {rank} < {D}); "
                "use delta > 0 or a full-rank design"
            )
    return np.linalg.solve(A, b)


def fisher_rank_check(Psi: np.ndarray, Phi: np.ndarray, w: LinearLSNMWeights):
    """Minimum eigenvalue of the averaged Fisher information and a PD flag."""
    T = Psi.shape[0]
    H = loglik_hessian_w(w.w1, w.w2, Psi, Phi, np.zeros(T))
    fisher = -H / T
    eigs = np.linalg.eigvalsh(fisher)
    min_eig = float(eigs[0])
    positive_definite = min_eig > 1e-10 * max(1.0, float(np.abs(eigs).max()))
    return min_eig, positive_definite


def fit_concave_design(
    Psi: np.ndarray,
    Phi: np.ndarray,
    y: np.ndarray,
    cfg: ConcaveFitConfig = ConcaveFitConfig(),
    w_init: LinearLSNMWeights | None = None,
) -> FittedLSNM:
    """Maximize the penalized log-likelihood over (w1, w2) on fixed designs."""
    y = np.asarray(y, dtype=float)
    T, D2 = Phi.shape
    if w_init is None:
        var_y = max(float(np.var(y)), 1e-8)
        rows = Phi.sum(axis=1)
        scale = float(np.median(rows[rows > 0]))
        w1 = np.zeros(Psi.shape[1])
        w2 = np.full(D2, 1.0 / (2.0 * var_y * scale))
    else:
        w1 = np.asarray(w_init.w1, dtype=float).copy()
        w2 = np.asarray(w_init.w2, dtype=float).copy()
    if np.any(Phi @ w2 <= 0):
        raise ValueError("initial w2 violates row positivity of phi(x)^T w2")

    def neg_obj_w2(w2_try):
        obj = penalized_loglik(w1, w2_try, Psi, Phi, y, cfg.delta)
        _, g2 = loglik_grad_w(w1, w2_try, Psi, Phi, y, cfg.delta)
        return -obj, -g2

    trace = [penalized_loglik(w1, w2, Psi, Phi, y, cfg.delta)]
    converged = False
    iters = 0
    for iters in range(1, cfg.max_outer_iters + 1):
        _, eta2 = _natural_params(Psi, Phi, w1, w2)
        alpha = -1.0 / (2.0 * eta2)
        w1 = wls_update_w1(Psi, y, alpha, cfg.delta)
        res = minimize(
            neg_obj_w2,
            w2,
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, None)] * D2,
            options={"maxiter": cfg.inner_solver_iters},
        )
        w2 = res.x
        if np.any(Phi @ w2 <= 0):
            w2 = w2 + 1e-8
        obj = penalized_loglik(w1, w2, Psi, Phi, y, cfg.delta)
        if not np.isfinite(obj):
            raise FloatingPointError(
                f"non-finite objective at outer iteration {iters}"
            )
        improvement = obj - trace[-1]
        trace.append(obj)
        if abs(improvement) < cfg.loglik_tol:
            converged = True
            break

    if cfg.refine:
        D1 = Psi.shape[1]

        def neg_obj_joint(wv):
            obj = penalized_loglik(wv[:D1], wv[D1:], Psi, Phi, y, cfg.delta)
            g1, g2 = loglik_grad_w(wv[:D1], wv[D1:], Psi, Phi, y, cfg.delta)
            return -obj, -np.concatenate([g1, g2])

        res = minimize(
            neg_obj_joint,
            np.concatenate([w1, w2]),
            jac=True,
            method="L-BFGS-B",
            bounds=[(None, None)] * D1 + [(0.0, None)] * D2,
            options={"maxiter": cfg.refine_maxiter, "ftol": 1e-14, "gtol": 1e-10},
        )
        if -res.fun >= trace[-1]:
            w1, w2 = res.x[:D1], res.x[D1:]
            if np.any(Phi @ w2 <= 0):
                w2 = w2 + 1e-8
            trace.append(penalized_loglik(w1, w2, Psi, Phi, y, cfg.delta))
            converged = converged or bool(res.success)
        if not np.isfinite(trace[-1]):
            raise FloatingPointError("non-finite objective after refinement")

    eta1, eta2 = _natural_params(Psi, Phi, w1, w2)
    var = clamp_variance(-1.0 / (2.0 * eta2))
    mu = -eta1 / (2.0 * eta2)
    report = loglik_report(y, NaturalParams(eta1, eta2))
    return FittedLSNM(
        mu_hat=mu,
        sigma_hat=np.sqrt(var),
        loglik=report,
        converged=converged,
        iters=iters,
        kind="spline_concave",
        params={
            "weights": LinearLSNMWeights(w1=w1, w2=w2),
            "objective_trace": np.asarray(trace),
        },
    )


def fit_concave(
    pair: SamplePair,
    map_psi: SplineFeatureMap,
    map_phi: SplineFeatureMap,
    cfg: ConcaveFitConfig = ConcaveFitConfig(),
) -> FittedLSNM:
    """Fit the spline-feature LSNM to (x, y); attaches a (mu, var) predictor."""
    Psi = map_psi.transform(pair.x)
    Phi = map_phi.transform(pair.x)
    fit = fit_concave_design(Psi, Phi, pair.y, cfg)
    w = fit.params["weights"]

    def predict(x_new):
        eta1 = map_psi.transform(x_new) @ w.w1
        rows = map_phi.transform(x_new) @ w.w2
        eta2 = -np.maximum(rows, ETA2_TINY)
        var = clamp_variance(-1.0 / (2.0 * eta2))
        return -eta1 / (2.0 * eta2), var

    fit.predict = predict
    return fit


def fit_spline_anm(
    pair: SamplePair,
    map_psi: SplineFeatureMap,
    delta: float = 1e-6,
) -> FittedLSNM:
    """ANM ablation: ridge mean fit plus a single global variance parameter.

    The global Gaussian MLE of the variance is the mean squared residual.
    """
    Psi = map_psi.transform(pair.x)
    D = Psi.shape[1]
    w1 = np.linalg.solve(Psi.T @ Psi + delta * np.eye(D), Psi.T @ pair.y)
    mu = Psi @ w1
    var = max(float(np.mean((pair.y - mu) ** 2)), 1e-10)
    sigma = np.full(len(pair), np.sqrt(var))
    report = loglik_report(pair.y, meanvar_nat(mu, var))
    fit = FittedLSNM(
        mu_hat=mu,
        sigma_hat=sigma,
        loglik=report,
        converged=True,
        iters=1,
        kind="anm_spline",
        params={"w1": w1, "var": var},
    )

    def predict(x_new):
        m = map_psi.transform(x_new) @ w1
        return m, np.full(len(np.atleast_1d(x_new)), var)

    fit.predict = predict
    return fit


def meanvar_nat(mu: np.ndarray, var) -> NaturalParams:
    var_arr = np.broadcast_to(np.asarray(var, dtype=float), np.shape(mu)).copy()
    return NaturalParams(mu / var_arr, -1.0 / (2.0 * var_arr))
