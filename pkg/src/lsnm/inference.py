"""Two-step cause-effect inference pipeline.

Standardize the pair, fit the chosen estimator in both directions, then
decide by comparing mean conditional log-likelihoods (loci_m) or HSIC
residual-independence p-values (loci_h). After standardization the Gaussian
marginal terms are identical in both directions and cancel, so scores carry
only the conditional parts.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .core import FittedLSNM, SamplePair
from .concave import ConcaveFitConfig, fit_concave, fit_spline_anm
from .features import build_spline_map, standardize
from .hsic import hsic_pvalue, residuals
from .ifgls import IFGLSConfig, fit_ifgls
from .mlp import MLPConfig, fit_mlp, fit_mlp_anm

ESTIMATORS = ("spline_concave", "mlp", "ifgls", "anm_spline", "anm_mlp")
METHODS = ("loci_m", "loci_h")

MIN_POINTS = 20
TIE_TOL = 1e-12


class TooFewPointsError(ValueError):
    pass


@dataclass(frozen=True)
class InferenceConfig:
    spline_order: int = 5
    n_knots: int = 25
    concave: ConcaveFitConfig = field(default_factory=ConcaveFitConfig)
    mlp: MLPConfig = field(default_factory=MLPConfig)
    ifgls: IFGLSConfig = field(default_factory=IFGLSConfig)
    hsic_method: str = "gamma"
    hsic_perms: int = 500
    sample_split: bool = False
    seed: int = 0
    # explicit per-direction seeds; default fans out from `seed`
    direction_seeds: Optional[Tuple[int, int]] = None

    def seeds(self) -> Tuple[int, int]:
        if self.direction_seeds is not None:
            return self.direction_seeds
        children = np.random.SeedSequence(self.seed).spawn(2)
        return tuple(int(c.generate_state(1)[0]) for c in children)


@dataclass(frozen=True)
class DirectionVerdict:
    direction: str  # x_to_y | y_to_x | undecided
    score_xy: float
    score_yx: float
    certainty: float
    method: str
    estimator: str
    diagnostic: Optional[str] = None


@dataclass
class PairAnalysis:
    """Both-direction fits on the standardized pair; shared by both rules."""

    pair_std: SamplePair
    fit_xy: Optional[FittedLSNM]
    fit_yx: Optional[FittedLSNM]
    estimator: str
    error: Optional[str] = None


def _fit_one(x: np.ndarray, y: np.ndarray, estimator: str, cfg: InferenceConfig,
             seed: int) -> FittedLSNM:
    pair = SamplePair(x, y)
    if estimator in ("spline_concave", "ifgls", "anm_spline"):
        map_psi = build_spline_map(x, order=cfg.spline_order, n_knots=cfg.n_knots)
        if estimator == "spline_concave":
            return fit_concave(pair, map_psi, map_psi, cfg.concave)
        if estimator == "ifgls":
            return fit_ifgls(pair, map_psi, map_psi, cfg.ifgls)
        return fit_spline_anm(pair, map_psi, delta=cfg.concave.delta)
    mlp_cfg = replace(cfg.mlp, seed=seed)
    if estimator == "mlp":
        return fit_mlp(pair, mlp_cfg)
    if estimator == "anm_mlp":
        return fit_mlp_anm(pair, mlp_cfg)
    raise ValueError(f"unknown estimator {estimator!r}; valid: {ESTIMATORS}")


def analyze_pair(pair: SamplePair, estimator: str,
                 cfg: InferenceConfig = InferenceConfig()) -> PairAnalysis:
    """Standardize and fit both directions; failures become a recorded error."""
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; valid: {ESTIMATORS}")
    if len(pair) < MIN_POINTS:
        raise TooFewPointsError(
            f"need at least {MIN_POINTS} points, got {len(pair)}"
        )
    pair_std, _ = standardize(pair)
    seed_xy, seed_yx = cfg.seeds()
    fit_xy = fit_yx = None
    error = None
    try:
        fit_xy = _fit_one(pair_std.x, pair_std.y, estimator, cfg, seed_xy)
        fit_yx = _fit_one(pair_std.y, pair_std.x, estimator, cfg, seed_yx)
    except Exception as exc:  # estimator failure -> undecided, never a guess
        error = f"{type(exc).__name__}: {exc}"
    return PairAnalysis(pair_std, fit_xy, fit_yx, estimator, error)


def _decide(score_xy: float, score_yx: float, method: str, estimator: str,
            diagnostic: Optional[str] = None) -> DirectionVerdict:
    certainty = abs(score_xy - score_yx)
    if diagnostic is not None or not np.isfinite(certainty):
        return DirectionVerdict("undecided", score_xy, score_yx, 0.0,
                                method, estimator, diagnostic or "non-finite score")
    if certainty <= TIE_TOL:
        direction = "undecided"
    elif score_xy > score_yx:
        direction = "x_to_y"
    else:
        direction = "y_to_x"
    return DirectionVerdict(direction, score_xy, score_yx, certainty,
                            method, estimator)


def verdict_loci_m(analysis: PairAnalysis) -> DirectionVerdict:
    if analysis.error is not None:
        return _decide(np.nan, np.nan, "loci_m", analysis.estimator, analysis.error)
    T = len(analysis.pair_std)
    score_xy = analysis.fit_xy.loglik.total / T
    score_yx = analysis.fit_yx.loglik.total / T
    return _decide(score_xy, score_yx, "loci_m", analysis.estimator)


def _hsic_score(fit: FittedLSNM, inp: np.ndarray, out: np.ndarray,
                cfg: InferenceConfig, seed: int):
    if cfg.sample_split:
        # fit was trained on the first half; test on the held-out second half
        half = len(inp) // 2
        inp_t, out_t = inp[half:], out[half:]
        mu, var = fit.predict(inp_t)
        r = (out_t - mu) / np.sqrt(var)
        return hsic_pvalue(inp_t, r, cfg.hsic_method, cfg.hsic_perms, seed)
    r = residuals(fit, SamplePair(inp, out))
    return hsic_pvalue(inp, r, cfg.hsic_method, cfg.hsic_perms, seed)


def verdict_loci_h(analysis: PairAnalysis,
                   cfg: InferenceConfig = InferenceConfig()) -> DirectionVerdict:
    if analysis.error is not None:
        return _decide(np.nan, np.nan, "loci_h", analysis.estimator, analysis.error)
    seed_xy, seed_yx = cfg.seeds()
    res_xy = _hsic_score(analysis.fit_xy, analysis.pair_std.x,
                         analysis.pair_std.y, cfg, seed_xy)
    res_yx = _hsic_score(analysis.fit_yx, analysis.pair_std.y,
                         analysis.pair_std.x, cfg, seed_yx)
    if res_xy.degenerate and res_yx.degenerate:
        return _decide(np.nan, np.nan, "loci_h", analysis.estimator,
                       "degenerate HSIC in both directions")
    return _decide(res_xy.p_value, res_yx.p_value, "loci_h", analysis.estimator)


def _analyze_for(pair: SamplePair, estimator: str, cfg: InferenceConfig,
                 split: bool) -> PairAnalysis:
    if not split:
        return analyze_pair(pair, estimator, cfg)
    if len(pair) < 2 * MIN_POINTS:
        raise TooFewPointsError(
            f"sample splitting needs at least {2 * MIN_POINTS} points"
        )
    pair_std, _ = standardize(pair)
    half = len(pair) // 2
    fit_pair = SamplePair(pair_std.x[:half], pair_std.y[:half])
    seed_xy, seed_yx = cfg.seeds()
    fit_xy = fit_yx = None
    error = None
    try:
        fit_xy = _fit_one(fit_pair.x, fit_pair.y, estimator, cfg, seed_xy)
        fit_yx = _fit_one(fit_pair.y, fit_pair.x, estimator, cfg, seed_yx)
    except Exception as exc:
        error = f"{type(exc).__name__}: {exc}"
    return PairAnalysis(pair_std, fit_xy, fit_yx, estimator, error)


def loci_m(pair: SamplePair, estimator: str = "mlp",
           cfg: InferenceConfig = InferenceConfig()) -> DirectionVerdict:
    """Likelihood rule: larger mean conditional log-likelihood wins."""
    return verdict_loci_m(analyze_pair(pair, estimator, cfg))


def loci_h(pair: SamplePair, estimator: str = "mlp",
           cfg: InferenceConfig = InferenceConfig()) -> DirectionVerdict:
    """Independence rule: larger HSIC p-value on standardized residuals wins."""
    analysis = _analyze_for(pair, estimator, cfg, cfg.sample_split)
    return verdict_loci_h(analysis, cfg)


def anm_ablation(pair: SamplePair, estimator: str = "mlp",
                 cfg: InferenceConfig = InferenceConfig(),
                 method: str = "loci_m") -> DirectionVerdict:
    """Fixed-variance ablation of the chosen estimator architecture."""
    anm_tag = {"spline_concave": "anm_spline", "mlp": "anm_mlp"}.get(
        estimator, estimator
    )
    if anm_tag not in ("anm_spline", "anm_mlp"):
        raise ValueError(f"no ANM ablation for estimator {estimator!r}")
    if method == "loci_m":
        return loci_m(pair, anm_tag, cfg)
    if method == "loci_h":
        return loci_h(pair, anm_tag, cfg)
    raise ValueError(f"unknown method {method!r}; valid: {METHODS}")
