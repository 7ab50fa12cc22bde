import numpy as np
import pytest

from lsnm.core import SamplePair, nat_to_meanvar
from lsnm.features import standardize
from lsnm.mlp import (
    F2_CLAMP,
    MLPConfig,
    MLPParams,
    fit_mlp,
    fit_mlp_anm,
    init_params,
    mlp_backward,
    mlp_forward,
    mlp_loss,
)
from lsnm.concave import fit_concave
from lsnm.features import build_spline_map
from lsnm.generators import GeneratorSpec, generate


def small_params(rng, hidden=3):
    return init_params(hidden, rng)


def test_zero_output_layer_gives_standard_normal(rng):
    p = small_params(rng, hidden=4)
    p.w_out[:] = 0.0
    p.b_out[:] = 0.0
    nat = mlp_forward(p, np.linspace(-3, 3, 20))
    assert np.allclose(nat.eta1, 0.0)
    assert np.allclose(nat.eta2, -0.5)


def test_f2_bias_sets_variance(rng):
    # with f2 = b everywhere, sigma^2 = exp(-b)
    for b in (-2.0, 0.0, 3.0):
        p = small_params(rng)
        p.w_out[:] = 0.0
        p.b_out[:] = [0.0, b]
        nat = mlp_forward(p, np.linspace(-1, 1, 10))
        mv = nat_to_meanvar(nat)
        assert np.allclose(mv.var, np.exp(-b), rtol=1e-12)


def test_variance_positive_for_random_params(rng):
    for _ in range(20):
        p = init_params(16, rng)
        nat = mlp_forward(p, rng.normal(scale=5.0, size=50))
        mv = nat_to_meanvar(nat)
        assert np.all(mv.var > 0)
        assert np.all(np.isfinite(mv.var))


def test_clamp_bounds_variance(rng):
    p = small_params(rng)
    p.w_out[:] = 0.0
    p.b_out[:] = [0.0, 100.0]  # would overflow without the clamp
    mv = nat_to_meanvar(mlp_forward(p, np.zeros(5)))
    assert np.allclose(mv.var, np.exp(-F2_CLAMP))


def test_gradient_matches_finite_differences(rng):
    h = 1e-5
    for _ in range(50):
        p = small_params(rng)
        x = rng.normal(size=5)
        y = rng.normal(size=5)
        grad = mlp_backward(p, x, y).flat()
        theta = p.flat()
        fd = np.empty_like(theta)
        for i in range(len(theta)):
            e = np.zeros_like(theta)
            e[i] = h
            lo = mlp_loss(MLPParams.from_flat(theta - e, 3), x, y)
            hi = mlp_loss(MLPParams.from_flat(theta + e, 3), x, y)
            fd[i] = (hi - lo) / (2 * h)
        scale = max(np.abs(fd).max(), 1.0)
        assert np.allclose(grad, fd, rtol=1e-5, atol=1e-5 * scale)


def test_constant_data_fixed_point(rng):
    # mu = c with the scale output railed at the clamp is stationary:
    # eta1 = mu / sigma^2 = c * exp(F2_CLAMP), and the clamp mask zeroes
    # the scale-head gradient
    c = 1.7
    p = small_params(rng)
    p.w_out[:] = 0.0
    p.b_out[:] = [c * np.exp(F2_CLAMP), F2_CLAMP]
    x = rng.normal(size=30)
    y = np.full(30, c)
    grad = mlp_backward(p, x, y)
    assert np.linalg.norm(grad.flat()) < 1e-6


def test_gradient_mean_invariance(rng):
    # mean-NLL gradient is unchanged by duplicating the sample
    p = small_params(rng)
    x = rng.normal(size=8)
    y = rng.normal(size=8)
    g1 = mlp_backward(p, x, y).flat()
    g2 = mlp_backward(p, np.tile(x, 2), np.tile(y, 2)).flat()
    assert np.allclose(g1, g2, atol=1e-12)


def test_fit_deterministic(rng):
    x = rng.normal(size=60)
    y = np.sin(x) + 0.3 * rng.normal(size=60)
    cfg = MLPConfig(hidden_width=10, steps=50, seed=7)
    a = fit_mlp(SamplePair(x, y), cfg)
    b = fit_mlp(SamplePair(x, y), cfg)
    assert a.loglik.total == b.loglik.total  # bit-identical


def test_training_does_not_diverge(rng):
    x = rng.normal(size=200)
    y = np.sin(x) + 0.2 * rng.normal(size=200)
    cfg = MLPConfig(hidden_width=20, steps=300, seed=0)
    p0 = init_params(cfg.hidden_width, np.random.default_rng(cfg.seed))
    loss0 = mlp_loss(p0, x, y)
    fit = fit_mlp(SamplePair(x, y), cfg)
    loss_end = -fit.loglik.total / len(x)
    assert loss_end <= loss0


def test_recovers_sinusoid_variance_shape():
    lp = generate(GeneratorSpec("sinusoid", n_points=1000, seed=3))
    std, scaler = standardize(lp.pair)
    fit = fit_mlp(std, MLPConfig(steps=2000, seed=0))
    four_pi = 4 * np.pi

    def sigma_at(x_raw):
        xs = (np.atleast_1d(x_raw) - scaler.mean_x) / scaler.std_x
        _, var = fit.predict(xs)
        return float(np.sqrt(var[0]))

    center = sigma_at(0.0)
    edges = max(sigma_at(four_pi - 0.1), sigma_at(-(four_pi - 0.1)))
    assert center > edges


def test_comparable_to_spline_on_additive_data():
    lp = generate(GeneratorSpec("an", n_points=500, seed=5))
    std, _ = standardize(lp.pair)
    mlp_fit = fit_mlp(std, MLPConfig(steps=2000, seed=0))
    m = build_spline_map(std.x)
    spline_fit = fit_concave(std, m, m)
    T = len(std)
    assert mlp_fit.loglik.total / T >= spline_fit.loglik.total / T - 0.05


def test_nonfinite_loss_aborts_with_step_index():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0.0, 1.0, np.nan, 3.0])
    with pytest.raises(FloatingPointError, match="step"):
        fit_mlp(SamplePair(x, y), MLPConfig(hidden_width=4, steps=5))


def test_anm_variant_uses_global_variance(rng):
    x = rng.normal(size=300)
    y = np.sin(x) + (0.2 + 0.3 * np.abs(x)) * rng.normal(size=300)
    fit = fit_mlp_anm(SamplePair(x, y), MLPConfig(hidden_width=20, steps=300))
    assert np.allclose(fit.sigma_hat, fit.sigma_hat[0])
    assert fit.params["var"] == pytest.approx(
        np.mean((y - fit.mu_hat) ** 2), rel=1e-10
    )


def test_config_validation():
    with pytest.raises(ValueError):
        MLPConfig(steps=0)
    with pytest.raises(ValueError):
        MLPConfig(lr_init=1e-3, lr_final=1e-2)
    with pytest.raises(ValueError):
        MLPConfig(activation="relu")
