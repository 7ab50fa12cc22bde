"""Nonnegative B-spline feature maps and data standardization.

The same basis serves both natural parameters: its values are nonnegative
and sum to one inside the knot range, so eta2 = -phi(x)^T w2 stays negative
whenever w2 is nonnegative with at least one active component.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .core import SamplePair


class TooFewDistinctPointsError(ValueError):
    pass


class ConstantInputError(ValueError):
    pass


@dataclass(frozen=True)
class SplineFeatureMap:
    """B-spline basis over a fixed knot grid.

    ``order`` is the polynomial degree of the pieces; ``knots`` are the base
    knots spanning the training range (strictly increasing). Inputs outside
    the knot range are clamped to it, so every basis value stays in [0, 1].
    """

    order: int
    knots: np.ndarray
    include_bias: bool = True

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", knots)
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if len(knots) < 2 or np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing with >= 2 entries")

    @property
    def n_knots(self) -> int:
        return len(self.knots)

    @property
    def n_features(self) -> int:
        return self.n_knots + self.order - 1 + (1 if self.include_bias else 0)

    @property
    def _full_knots(self) -> np.ndarray:
        # Extend the base knots by `order` equidistant knots on each side,
        # using the edge spacings, so all base intervals carry a full basis.
        k = self.knots
        lo = k[0] - (k[1] - k[0]) * np.arange(self.order, 0, -1)
        hi = k[-1] + (k[-1] - k[-2]) * np.arange(1, self.order + 1)
        return np.concatenate([lo, k, hi])

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Design matrix of shape (len(x), n_features); entries in [0, 1]."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xc = np.clip(x, self.knots[0], self.knots[-1])
        basis = BSpline.design_matrix(
            xc, self._full_knots, self.order, extrapolate=False
        ).toarray()
        # clip tiny negative round-off from the sparse evaluation
        basis = np.clip(basis, 0.0, None)
        if self.include_bias:
            basis = np.hstack([basis, np.ones((len(x), 1))])
        return basis


def build_spline_map(
    x_train: np.ndarray,
    order: int = 5,
    n_knots: int = 25,
    include_bias: bool = True,
    trim: float = 0.01,
) -> SplineFeatureMap:
    """Place ``n_knots`` quantile knots over the training sample.

    By default knots span the ``trim``..``1 - trim`` quantile range; the
    clamping rule then pools each tail into the edge basis so the outermost
    coefficients are estimated from a stable share of the sample instead of
    a handful of extreme points. ``trim=0`` spans the full sample range.
    Duplicated quantiles (heavily tied data) reduce the effective knot count
    with a warning; fewer than 2 distinct training values is an error.
    """
    x_train = np.asarray(x_train, dtype=float)
    if order < 1:
        raise ValueError("order must be >= 1")
    if n_knots < 2:
        raise ValueError("n_knots must be >= 2")
    if not 0.0 <= trim < 0.5:
        raise ValueError("trim must be in [0, 0.5)")
    distinct = np.unique(x_train)
    if len(distinct) < 2:
        raise TooFewDistinctPointsError(
            f"need at least 2 distinct x values, got {len(distinct)}"
        )
    if len(distinct) < n_knots:
        warnings.warn(
            f"only {len(distinct)} distinct x values; reducing knot count "
            f"from {n_knots}",
            stacklevel=2,
        )
        n_knots = len(distinct)
    quantiles = np.quantile(x_train, np.linspace(trim, 1.0 - trim, n_knots))
    knots = np.unique(quantiles)
    if len(knots) < n_knots:
        warnings.warn(
            f"tied quantiles reduced knot count from {n_knots} to {len(knots)}",
            stacklevel=2,
        )
    if len(knots) < 2:
        raise TooFewDistinctPointsError(
            "quantile knots collapsed to a single point; need >= 2"
        )
    return SplineFeatureMap(order=order, knots=knots, include_bias=include_bias)


@dataclass(frozen=True)
class Standardizer:
    """Affine transform to zero mean and unit (population) variance."""

    mean_x: float
    std_x: float
    mean_y: float
    std_y: float

    def transform(self, pair: SamplePair) -> SamplePair:
        return SamplePair(
            (pair.x - self.mean_x) / self.std_x,
            (pair.y - self.mean_y) / self.std_y,
        )

    def inverse_transform(self, pair: SamplePair) -> SamplePair:
        return SamplePair(
            pair.x * self.std_x + self.mean_x,
            pair.y * self.std_y + self.mean_y,
        )


def standardize(pair: SamplePair):
    """Standardize both coordinates; rejects constant vectors."""
    std_x = float(np.std(pair.x))
    std_y = float(np.std(pair.y))
    if std_x == 0.0 or std_y == 0.0:
        raise ConstantInputError(
            "constant input vector: direction is undecidable on degenerate data"
        )
    scaler = Standardizer(
        mean_x=float(np.mean(pair.x)),
        std_x=std_x,
        mean_y=float(np.mean(pair.y)),
        std_y=std_y,
    )
    return scaler.transform(pair), scaler
