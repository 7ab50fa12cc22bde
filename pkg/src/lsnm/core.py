"""Heteroscedastic Gaussian in its natural parametrization.

The conditional model is N(y; mu(x), var(x)) expressed through the natural
parameters eta1 = mu/var and eta2 = -1/(2 var), in which the log-density is
strictly concave. All log-likelihoods are in nats.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

LOG_2PI = float(np.log(2.0 * np.pi))

# Floor applied when converting estimator outputs to variances; keeps
# degenerate fits from producing -inf log-likelihoods.
VAR_FLOOR = 1e-10


@dataclass(frozen=True)
class NaturalParams:
    """Natural parameters (eta1, eta2) of a conditional Gaussian, eta2 < 0.

    Fields may be scalars or aligned arrays (one Gaussian per point).
    """

    eta1: ArrayLike
    eta2: ArrayLike

    def __post_init__(self):
        if not np.all(np.asarray(self.eta2) < 0):
            raise ValueError("eta2 must be strictly negative")


@dataclass(frozen=True)
class MeanVarParams:
    """Mean/variance parameters of a conditional Gaussian, var > 0."""

    mu: ArrayLike
    var: ArrayLike

    def __post_init__(self):
        if not np.all(np.asarray(self.var) > 0):
            raise ValueError("var must be strictly positive")


@dataclass(frozen=True)
class LogLikReport:
    """Total and per-point conditional log-likelihoods in nats."""

    total: float
    per_point: np.ndarray


@dataclass(frozen=True)
class SamplePair:
    """Two aligned real-valued sample vectors (candidate cause and effect)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.ndim != 1 or self.y.ndim != 1:
            raise ValueError("SamplePair requires 1-d vectors")
        if len(self.x) != len(self.y):
            raise ValueError(
                f"length mismatch: len(x)={len(self.x)}, len(y)={len(self.y)}"
            )

    def __len__(self):
        return len(self.x)

    def swapped(self) -> "SamplePair":
        return SamplePair(self.y, self.x)


@dataclass
class FittedLSNM:
    """Output of a location-scale estimator on one (x, y) sample.

    ``predict`` maps new x to (mu, var) arrays; estimator-specific parameters
    live in ``params``.
    """

    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    loglik: LogLikReport
    converged: bool
    iters: int
    kind: str
    params: dict = field(default_factory=dict)
    predict: Optional[Callable[[np.ndarray], tuple]] = None

    def __post_init__(self):
        if not np.all(self.sigma_hat > 0):
            raise ValueError("sigma_hat must be strictly positive")
        if not np.isfinite(self.loglik.total):
            raise ValueError("loglik.total must be finite")


def nat_to_meanvar(p: NaturalParams) -> MeanVarParams:
    """Invert the natural parametrization: mu = -eta1/(2 eta2), var = -1/(2 eta2)."""
    eta1 = np.asarray(p.eta1, dtype=float)
    eta2 = np.asarray(p.eta2, dtype=float)
    var = -1.0 / (2.0 * eta2)
    mu = -eta1 / (2.0 * eta2)
    if np.ndim(p.eta1) == 0:
        return MeanVarParams(float(mu), float(var))
    return MeanVarParams(mu, var)


def meanvar_to_nat(p: MeanVarParams) -> NaturalParams:
    """eta1 = mu/var, eta2 = -1/(2 var)."""
    mu = np.asarray(p.mu, dtype=float)
    var = np.asarray(p.var, dtype=float)
    eta1 = mu / var
    eta2 = -1.0 / (2.0 * var)
    if np.ndim(p.mu) == 0:
        return NaturalParams(float(eta1), float(eta2))
    return NaturalParams(eta1, eta2)


def loglik_point(y: ArrayLike, p: NaturalParams) -> ArrayLike:
    """Gaussian log-density in natural form.

    log p(y | eta) = -log(2 pi)/2 + eta1 y + eta2 y^2 + eta1^2/(4 eta2)
                     + log sqrt(-2 eta2)
    """
    y = np.asarray(y, dtype=float)
    eta1 = np.asarray(p.eta1, dtype=float)
    eta2 = np.asarray(p.eta2, dtype=float)
    out = (
        -0.5 * LOG_2PI
        + eta1 * y
        + eta2 * y * y
        + eta1 * eta1 / (4.0 * eta2)
        + 0.5 * np.log(-2.0 * eta2)
    )
    if out.ndim == 0:
        return float(out)
    return out


def loglik_grad_hess_eta(y: float, p: NaturalParams):
    """Gradient and Hessian of loglik_point w.r.t. (eta1, eta2) at scalar inputs.

    The Hessian does not depend on y and is negative definite for any valid p
    (its determinant is -1/(4 eta2^3) > 0 and the top-left entry is negative).
    """
    eta1 = float(np.asarray(p.eta1))
    eta2 = float(np.asarray(p.eta2))
    grad = np.array(
        [
            y + eta1 / (2.0 * eta2),
            y * y - eta1 * eta1 / (4.0 * eta2 * eta2) + 1.0 / (2.0 * eta2),
        ]
    )
    h11 = 1.0 / (2.0 * eta2)
    h12 = -eta1 / (2.0 * eta2 * eta2)
    h22 = eta1 * eta1 / (2.0 * eta2 ** 3) - 1.0 / (2.0 * eta2 * eta2)
    hess = np.array([[h11, h12], [h12, h22]])
    return grad, hess


def loglik_report(y: np.ndarray, p: NaturalParams) -> LogLikReport:
    """Aggregate per-point log-likelihoods into a report."""
    per_point = np.asarray(loglik_point(y, p), dtype=float)
    per_point = np.atleast_1d(per_point)
    return LogLikReport(total=float(per_point.sum()), per_point=per_point)


def clamp_variance(var: np.ndarray) -> np.ndarray:
    """Apply the numerical variance floor."""
    return np.maximum(np.asarray(var, dtype=float), VAR_FLOOR)
