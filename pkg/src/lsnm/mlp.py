"""Neural-network LSNM estimator.

A single hidden tanh layer maps x to the two natural parameters, with an
exponential link keeping eta2 negative: eta1 = f1(x), eta2 = -exp(f2(x))/2.
Training is full-batch Adam with a cosine learning-rate schedule; gradients
are closed-form for this fixed architecture.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import (
    FittedLSNM,
    NaturalParams,
    SamplePair,
    clamp_variance,
    loglik_report,
)

# Clamp on the pre-exponential output; keeps var in roughly [3e-7, 3e6].
F2_CLAMP = 15.0


@dataclass(frozen=True)
class MLPConfig:
    hidden_width: int = 100
    activation: str = "tanh"
    steps: int = 5000
    lr_init: float = 1e-2
    lr_final: float = 1e-6
    schedule: str = "cosine"
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not (0 < self.lr_final <= self.lr_init):
            raise ValueError("require 0 < lr_final <= lr_init")
        if self.activation != "tanh":
            raise ValueError("only tanh activation is supported")
        if self.schedule != "cosine":
            raise ValueError("only the cosine schedule is supported")


@dataclass
class MLPParams:
    """Weights of the 1 -> hidden -> 2 network."""

    w_in: np.ndarray  # (H,)
    b_in: np.ndarray  # (H,)
    w_out: np.ndarray  # (H, 2)
    b_out: np.ndarray  # (2,)

    def flat(self) -> np.ndarray:
        return np.concatenate(
            [self.w_in, self.b_in, self.w_out.ravel(), self.b_out]
        )

    @classmethod
    def from_flat(cls, v: np.ndarray, hidden: int) -> "MLPParams":
        h = hidden
        return cls(
            w_in=v[:h].copy(),
            b_in=v[h : 2 * h].copy(),
            w_out=v[2 * h : 4 * h].reshape(h, 2).copy(),
            b_out=v[4 * h :].copy(),
        )


def init_params(hidden: int, rng: np.random.Generator) -> MLPParams:
    # symmetric uniform fan-in scaling, standard for tanh layers
    a_in = 1.0
    a_out = 1.0 / np.sqrt(hidden)
    return MLPParams(
        w_in=rng.uniform(-a_in, a_in, size=hidden),
        b_in=np.zeros(hidden),
        w_out=rng.uniform(-a_out, a_out, size=(hidden, 2)),
        b_out=np.zeros(2),
    )


def mlp_forward(params: MLPParams, x: np.ndarray) -> NaturalParams:
    """Per-point natural parameters; eta2 < 0 by the exponential link."""
    _, _, eta1, eta2 = _forward_cache(params, np.asarray(x, dtype=float))
    return NaturalParams(eta1, eta2)


def _forward_cache(params: MLPParams, x: np.ndarray):
    z = np.tanh(np.outer(x, params.w_in) + params.b_in)  # (T, H)
    out = z @ params.w_out + params.b_out  # (T, 2)
    f2 = np.clip(out[:, 1], -F2_CLAMP, F2_CLAMP)
    eta1 = out[:, 0]
    eta2 = -0.5 * np.exp(f2)
    return z, out, eta1, eta2


def mlp_loss(params: MLPParams, x: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-likelihood in nats per point."""
    _, _, eta1, eta2 = _forward_cache(params, x)
    mu = -eta1 / (2.0 * eta2)
    var = -1.0 / (2.0 * eta2)
    nll = 0.5 * np.log(2.0 * np.pi * var) + 0.5 * (y - mu) ** 2 / var
    return float(np.mean(nll))


def mlp_backward(params: MLPParams, x: np.ndarray, y: np.ndarray) -> MLPParams:
    """Gradient of the mean negative log-likelihood w.r.t. all weights."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    T = len(x)
    z, out, eta1, eta2 = _forward_cache(params, x)
    mu = -eta1 / (2.0 * eta2)
    var = -1.0 / (2.0 * eta2)
    # d(mean NLL)/d eta = -(1/T) d loglik/d eta; chain through the exp link
    d_f1 = -(y - mu) / T
    inside = np.abs(out[:, 1]) < F2_CLAMP
    d_f2 = -(y * y - mu * mu - var) * eta2 * inside / T
    G = np.stack([d_f1, d_f2], axis=1)  # (T, 2)
    g_w_out = z.T @ G
    g_b_out = G.sum(axis=0)
    dz = (G @ params.w_out.T) * (1.0 - z * z)
    g_w_in = x @ dz
    g_b_in = dz.sum(axis=0)
    return MLPParams(w_in=g_w_in, b_in=g_b_in, w_out=g_w_out, b_out=g_b_out)


def _loss_grad_fused(params: MLPParams, x: np.ndarray, y: np.ndarray):
    """Single-pass loss and gradient; shares the forward activations."""
    T = len(x)
    z = np.tanh(np.outer(x, params.w_in) + params.b_in)
    out = z @ params.w_out + params.b_out
    f2 = np.clip(out[:, 1], -F2_CLAMP, F2_CLAMP)
    eta2 = -0.5 * np.exp(f2)
    var = -1.0 / (2.0 * eta2)
    mu = -out[:, 0] / (2.0 * eta2)
    resid = y - mu
    loss = float(np.mean(0.5 * np.log(2.0 * np.pi * var) + 0.5 * resid ** 2 / var))
    G = np.empty_like(out)
    G[:, 0] = -resid / T
    G[:, 1] = -(y * y - mu * mu - var) * eta2 * (np.abs(out[:, 1]) < F2_CLAMP) / T
    dz = (G @ params.w_out.T) * (1.0 - z * z)
    grad = MLPParams(
        w_in=x @ dz,
        b_in=dz.sum(axis=0),
        w_out=z.T @ G,
        b_out=G.sum(axis=0),
    )
    return loss, grad


def _cosine_lr(step: int, cfg: MLPConfig) -> float:
    frac = step / max(cfg.steps - 1, 1)
    return cfg.lr_final + 0.5 * (cfg.lr_init - cfg.lr_final) * (
        1.0 + np.cos(np.pi * frac)
    )


def _adam_train(loss_grad, params: MLPParams, cfg: MLPConfig) -> MLPParams:
    """Full-batch Adam over the network weights, cosine-decayed step size."""
    weights = [params.w_in.copy(), params.b_in.copy(),
               params.w_out.copy(), params.b_out.copy()]
    m = [np.zeros_like(w) for w in weights]
    v = [np.zeros_like(w) for w in weights]
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    for step in range(cfg.steps):
        p = MLPParams(*weights)
        loss, grad = loss_grad(p)
        if not np.isfinite(loss):
            raise FloatingPointError(f"non-finite training loss at step {step}")
        lr = _cosine_lr(step, cfg)
        c1 = 1.0 - b1 ** (step + 1)
        c2 = 1.0 - b2 ** (step + 1)
        grads = [grad.w_in, grad.b_in, grad.w_out, grad.b_out]
        for i, g in enumerate(grads):
            m[i] = b1 * m[i] + (1.0 - b1) * g
            v[i] = b2 * v[i] + (1.0 - b2) * g * g
            weights[i] = weights[i] - lr * (m[i] / c1) / (np.sqrt(v[i] / c2) + eps)
            if not np.all(np.isfinite(weights[i])):
                raise FloatingPointError(f"non-finite parameters at step {step}")
    return MLPParams(*weights)


def fit_mlp(pair: SamplePair, cfg: MLPConfig = MLPConfig()) -> FittedLSNM:
    """Train the heteroscedastic network on (x, y); deterministic per seed."""
    x, y = pair.x, pair.y
    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg.hidden_width, rng)
    params = _adam_train(lambda p: _loss_grad_fused(p, x, y), params, cfg)
    _, _, eta1, eta2 = _forward_cache(params, x)
    var = clamp_variance(-1.0 / (2.0 * eta2))
    mu = -eta1 / (2.0 * eta2)
    fit = FittedLSNM(
        mu_hat=mu,
        sigma_hat=np.sqrt(var),
        loglik=loglik_report(y, NaturalParams(eta1, eta2)),
        converged=True,
        iters=cfg.steps,
        kind="mlp",
        params={"mlp": params},
    )

    def predict(x_new):
        _, _, e1, e2 = _forward_cache(params, np.atleast_1d(np.asarray(x_new, float)))
        v = clamp_variance(-1.0 / (2.0 * e2))
        return -e1 / (2.0 * e2), v

    fit.predict = predict
    return fit


def fit_mlp_anm(pair: SamplePair, cfg: MLPConfig = MLPConfig()) -> FittedLSNM:
    """ANM ablation: same architecture trained on the mean only (fixed noise).

    With a constant variance the Gaussian MLE profile reduces to mean-squared
    -error training plus a plug-in variance equal to the mean squared residual.
    """
    x, y = pair.x, pair.y
    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg.hidden_width, rng)
    T = len(x)

    def loss_grad(p):
        z = np.tanh(np.outer(x, p.w_in) + p.b_in)
        out = z @ p.w_out + p.b_out
        resid = out[:, 0] - y
        loss = float(np.mean(resid ** 2))
        G = np.zeros_like(out)
        G[:, 0] = 2.0 * resid / T
        g_w_out = z.T @ G
        g_b_out = G.sum(axis=0)
        dz = (G @ p.w_out.T) * (1.0 - z * z)
        g = MLPParams(w_in=x @ dz, b_in=dz.sum(axis=0), w_out=g_w_out, b_out=g_b_out)
        return loss, g

    params = _adam_train(loss_grad, params, cfg)
    z = np.tanh(np.outer(x, params.w_in) + params.b_in)
    mu = (z @ params.w_out + params.b_out)[:, 0]
    var = max(float(np.mean((y - mu) ** 2)), 1e-10)
    sigma = np.full(T, np.sqrt(var))
    eta = NaturalParams(mu / var, np.full(T, -1.0 / (2.0 * var)))
    fit = FittedLSNM(
        mu_hat=mu,
        sigma_hat=sigma,
        loglik=loglik_report(y, eta),
        converged=True,
        iters=cfg.steps,
        kind="anm_mlp",
        params={"mlp": params, "var": var},
    )

    def predict(x_new):
        xs = np.atleast_1d(np.asarray(x_new, float))
        zz = np.tanh(np.outer(xs, params.w_in) + params.b_in)
        m = (zz @ params.w_out + params.b_out)[:, 0]
        return m, np.full(len(xs), var)

    fit.predict = predict
    return fit
