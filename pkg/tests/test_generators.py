import numpy as np
import pytest

from lsnm.generators import (
    FAMILIES,
    FOUR_PI,
    GeneratorSpec,
    LabeledPair,
    generate,
    generate_corpus,
    generate_with_truth,
    sinusoid_truth_mean,
    sinusoid_truth_var,
)
from lsnm.hsic import hsic_pvalue


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec("gp", 100, 0)
    with pytest.raises(ValueError):
        GeneratorSpec("an", 10, 0)
    with pytest.raises(ValueError):
        GeneratorSpec("an", 100, 0, mechanism_complexity=0)


def test_reproducible_bytes():
    spec = GeneratorSpec("ls", 500, 42)
    a = generate(spec)
    b = generate(spec)
    assert np.array_equal(a.pair.x, b.pair.x)
    assert np.array_equal(a.pair.y, b.pair.y)
    assert a.true_direction == "x_to_y"
    assert a.dataset == "ls"


def test_all_families_generate():
    for fam in FAMILIES:
        lp = generate(GeneratorSpec(fam, 200, 1))
        assert len(lp.pair) == 200
        assert np.all(np.isfinite(lp.pair.x))
        assert np.all(np.isfinite(lp.pair.y))


def test_sinusoid_window_moments():
    lp = generate(GeneratorSpec("sinusoid", 200_000, 0))
    x, y = lp.pair.x, lp.pair.y
    window = np.abs(x) < 0.1
    assert abs(np.mean(y[window])) < 0.1
    want_std = np.sqrt(0.1 * FOUR_PI + 0.2)
    assert np.std(y[window]) == pytest.approx(want_std, rel=0.1)


def test_sinusoid_truth_functions():
    x = np.array([0.0, FOUR_PI])
    assert np.allclose(sinusoid_truth_mean(x), [0.0, np.sin(FOUR_PI)])
    assert np.allclose(sinusoid_truth_var(x), [0.1 * FOUR_PI + 0.2, 0.2])


def test_an_residuals_independent_of_cause():
    lp, truth = generate_with_truth(GeneratorSpec("an", 1000, 7))
    resid = lp.pair.y - truth["location"](lp.pair.x)
    assert np.std(resid) == pytest.approx(0.2, rel=0.1)
    res = hsic_pvalue(lp.pair.x, resid, method="permutation",
                      n_perms=200, seed=0)
    assert res.p_value > 0.01


def test_ls_variance_is_heteroscedastic():
    lp = generate(GeneratorSpec("ls", 20_000, 11))
    x, y = lp.pair.x, lp.pair.y
    edges = np.quantile(x, np.linspace(0, 1, 11))
    variances = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        window = (x >= lo) & (x <= hi)
        variances.append(np.var(y[window]))
    assert max(variances) / min(variances) > 2.0


def test_ls_scale_truth_matches_windowed_std():
    lp, truth = generate_with_truth(GeneratorSpec("ls", 50_000, 2))
    x, y = lp.pair.x, lp.pair.y
    window = np.abs(x - 1.0) < 0.1
    resid = y[window] - truth["location"](x[window])
    assert np.std(resid) == pytest.approx(float(truth["scale"](np.array([1.0]))[0]),
                                          rel=0.15)


def test_mnu_support():
    lp, truth = generate_with_truth(GeneratorSpec("mnu", 5000, 3))
    x, y = lp.pair.x, lp.pair.y
    assert np.all(x >= 0) and np.all(x <= 1)
    # multiplicative uniform noise: y | x uniform on [0, m(x)], so the
    # conditional mean is m/2 and the conditional std is m/sqrt(12)
    bound = 2.0 * truth["location"](x)
    assert np.all(y >= 0)
    assert np.all(y <= bound + 1e-12)
    assert np.allclose(truth["scale"](x) * np.sqrt(12.0), bound)


def test_squashed_families_bounded_location():
    lp, truth = generate_with_truth(GeneratorSpec("an_s", 2000, 5))
    loc = truth["location"](lp.pair.x)
    assert np.all(loc > 0) and np.all(loc < 1)


def test_labeled_pair_flip():
    lp = generate(GeneratorSpec("an", 100, 0))
    fl = lp.flipped()
    assert fl.true_direction == "y_to_x"
    assert np.array_equal(fl.pair.x, lp.pair.y)
    assert fl.flipped().true_direction == "x_to_y"
    with pytest.raises(ValueError):
        LabeledPair(lp.pair, "sideways", "an", "p0")


def test_corpus_orientation_randomized():
    corpus = generate_corpus("an", 40, 50, seed=0)
    dirs = {lp.true_direction for lp in corpus}
    assert dirs == {"x_to_y", "y_to_x"}
    ids = [lp.pair_id for lp in corpus]
    assert len(set(ids)) == 40
    again = generate_corpus("an", 40, 50, seed=0)
    for a, b in zip(corpus, again):
        assert a.true_direction == b.true_direction
        assert np.array_equal(a.pair.x, b.pair.x)


def test_corpus_without_randomization():
    corpus = generate_corpus("ls", 10, 50, seed=1, randomize_orientation=False)
    assert all(lp.true_direction == "x_to_y" for lp in corpus)
