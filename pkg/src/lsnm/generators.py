"""Synthetic cause-effect pair generators.

Families: additive (an, an_s), location-scale (ls, ls_s), multiplicative
(mnu), and the sinusoidal heteroscedastic law used for the estimator
comparison (sinusoid). Mechanisms are seeded random mixtures of
sigmoid bumps, low-order monomials, and sine terms; scale functions are made
strictly positive through a softplus offset. The cause is always emitted as
x with true_direction = x_to_y; orientation is randomized at corpus level.
"""

from dataclasses import dataclass

import numpy as np

from .core import SamplePair

FAMILIES = ("an", "an_s", "ls", "ls_s", "mnu", "sinusoid")

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n_points: int = 1000
    seed: int = 0
    mechanism_complexity: int = 5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; valid: {FAMILIES}")
        if self.n_points < 20:
            raise ValueError("n_points must be >= 20")
        if self.mechanism_complexity < 1:
            raise ValueError("mechanism_complexity must be >= 1")


@dataclass(frozen=True)
class LabeledPair:
    pair: SamplePair
    true_direction: str
    dataset: str
    pair_id: str
    weight: float = 1.0

    def __post_init__(self):
        if self.true_direction not in ("x_to_y", "y_to_x"):
            raise ValueError("true_direction must be x_to_y or y_to_x")

    def flipped(self) -> "LabeledPair":
        other = {"x_to_y": "y_to_x", "y_to_x": "x_to_y"}[self.true_direction]
        return LabeledPair(self.pair.swapped(), other, self.dataset,
                           self.pair_id, self.weight)


def _softplus(z):
    return np.logaddexp(0.0, z)


def _random_mechanism(rng: np.random.Generator, n_components: int,
                      x_lo: float, x_hi: float):
    """Mixture of sigmoid bumps, monomials, and sine terms over [x_lo, x_hi]."""
    parts = []
    kinds = rng.choice(["sigmoid", "monomial", "sine"], size=n_components)
    width = x_hi - x_lo
    for kind in kinds:
        if kind == "sigmoid":
            a = rng.uniform(1.0, 3.0) * rng.choice([-1.0, 1.0])
            b = rng.uniform(x_lo, x_hi)
            c = rng.uniform(0.1, 0.5) * width
            parts.append(lambda x, a=a, b=b, c=c: a / (1.0 + np.exp(-(x - b) / c)))
        elif kind == "monomial":
            k = int(rng.integers(1, 4))
            a = rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0]) / width ** (k - 1)
            parts.append(lambda x, a=a, k=k: a * x ** k)
        else:
            a = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
            b = rng.uniform(2.0, 8.0) / width
            phase = rng.uniform(0.0, 2.0 * np.pi)
            parts.append(lambda x, a=a, b=b, p=phase: a * np.sin(b * x + p))

    def mech(x):
        return sum(p(x) for p in parts)

    return mech


def _squash(z):
    # fixed invertible sigmoid applied to the mechanism for the *_s families
    return 1.0 / (1.0 + np.exp(-z))


def generate_with_truth(spec: GeneratorSpec):
    """Draw one labeled pair plus the true (location, scale) functions.

    Returns (LabeledPair, truth) where truth maps "location" and "scale" to
    callables of the cause; identical spec gives identical bytes.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_points
    fam = spec.family

    if fam == "sinusoid":
        x = rng.uniform(-FOUR_PI, FOUR_PI, size=n)
        var = sinusoid_truth_var(x)
        y = rng.normal(np.sin(x), np.sqrt(var))
        truth = {"location": sinusoid_truth_mean,
                 "scale": lambda z: np.sqrt(sinusoid_truth_var(z))}
    elif fam == "mnu":
        # multiplicative uniform noise on a smooth strictly positive
        # mechanism: y | x is uniform on [0, m(x)]. The raw mechanism is
        # standardized over the cause's support before exponentiation so
        # every pair carries a comparable multiplicative signal (neither
        # near-constant nor wildly spiked).
        x = rng.uniform(0.0, 1.0, size=n)
        f = _random_mechanism(rng, spec.mechanism_complexity, 0.0, 1.0)
        grid = np.linspace(0.0, 1.0, 512)
        f_grid = f(grid)
        f_mean, f_std = float(f_grid.mean()), max(float(f_grid.std()), 1e-8)
        m = lambda z: np.exp(0.5 * (f(z) - f_mean) / f_std)
        u = rng.uniform(0.0, 1.0, size=n)
        y = m(x) * u
        truth = {"location": lambda z: 0.5 * m(z),
                 "scale": lambda z: m(z) / np.sqrt(12.0)}
    else:
        x = rng.normal(size=n)
        x = np.clip(x, -3.0, 3.0)
        f = _random_mechanism(rng, spec.mechanism_complexity, -3.0, 3.0)
        g_raw = _random_mechanism(rng, spec.mechanism_complexity, -3.0, 3.0)
        noise = rng.normal(size=n)
        if fam == "an":
            y = f(x) + 0.2 * noise
            truth = {"location": f, "scale": lambda z: np.full_like(z, 0.2)}
        elif fam == "an_s":
            y = _squash(f(x)) + 0.2 * noise
            truth = {"location": lambda z: _squash(f(z)),
                     "scale": lambda z: np.full_like(z, 0.2)}
        elif fam == "ls":
            scale = lambda z: _softplus(g_raw(z)) + 0.1
            y = f(x) + scale(x) * noise
            truth = {"location": f, "scale": scale}
        else:  # ls_s
            loc = lambda z: _squash(f(z))
            scale = lambda z: _softplus(g_raw(loc(z))) + 0.1
            y = loc(x) + scale(x) * noise
            truth = {"location": loc, "scale": scale}

    lp = LabeledPair(
        pair=SamplePair(x, y),
        true_direction="x_to_y",
        dataset=fam,
        pair_id=f"{fam}-{spec.seed:06d}",
    )
    return lp, truth


def generate(spec: GeneratorSpec) -> LabeledPair:
    """Draw one labeled pair; identical spec gives identical bytes."""
    lp, _ = generate_with_truth(spec)
    return lp


def generate_corpus(family: str, n_pairs: int, n_points: int, seed: int,
                    mechanism_complexity: int = 5, randomize_orientation: bool = True):
    """A list of labeled pairs with seeded per-pair generators.

    Orientation randomization flips half the pairs (deterministically per
    seed) so corpus metrics cannot be gamed by always answering x_to_y.
    """
    root = np.random.SeedSequence(seed)
    children = root.spawn(n_pairs + 1)
    flip_rng = np.random.default_rng(children[-1])
    pairs = []
    for i in range(n_pairs):
        sub_seed = int(children[i].generate_state(1)[0])
        lp = generate(GeneratorSpec(family, n_points, sub_seed,
                                    mechanism_complexity))
        lp = LabeledPair(lp.pair, lp.true_direction, lp.dataset,
                         f"{family}-{i:04d}", lp.weight)
        if randomize_orientation and flip_rng.uniform() < 0.5:
            lp = lp.flipped()
        pairs.append(lp)
    return pairs


def sinusoid_truth_mean(x):
    return np.sin(np.asarray(x, dtype=float))


def sinusoid_truth_var(x):
    return 0.1 * (FOUR_PI - np.abs(np.asarray(x, dtype=float))) + 0.2
