import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


class FunctionFeatureMap:
    """Feature map backed by explicit column functions; test-only helper."""

    def __init__(self, funcs):
        self.funcs = list(funcs)

    @property
    def n_features(self):
        return len(self.funcs)

    def transform(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.column_stack([f(x) for f in self.funcs])


def positive_design_map():
    """Four nonnegative columns with an always-on bias; any w2 >= 0 with a
    positive bias component keeps eta2 strictly negative."""
    return FunctionFeatureMap([
        lambda x: np.ones_like(x),
        lambda x: 1.0 / (1.0 + np.exp(-x)),
        lambda x: 1.0 / (1.0 + np.exp(x)),
        lambda x: 0.25 * x * x,
    ])
