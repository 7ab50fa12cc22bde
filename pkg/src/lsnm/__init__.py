"""Location-scale noise model estimation and cause-effect inference."""

from .core import (
    FittedLSNM,
    LogLikReport,
    MeanVarParams,
    NaturalParams,
    SamplePair,
    loglik_grad_hess_eta,
    loglik_point,
    meanvar_to_nat,
    nat_to_meanvar,
)
from .features import SplineFeatureMap, Standardizer, build_spline_map, standardize
from .concave import (
    ConcaveFitConfig,
    LinearLSNMWeights,
    fisher_rank_check,
    fit_concave,
    fit_concave_design,
    fit_spline_anm,
    wls_update_w1,
)
from .mlp import MLPConfig, MLPParams, fit_mlp, fit_mlp_anm, mlp_forward
from .ifgls import IFGLSConfig, fit_ifgls
from .hsic import HsicResult, hsic_pvalue, hsic_statistic, residuals
from .inference import (
    DirectionVerdict,
    InferenceConfig,
    anm_ablation,
    loci_h,
    loci_m,
)
from .generators import (
    GeneratorSpec,
    LabeledPair,
    generate,
    generate_corpus,
    generate_with_truth,
)
from .benchlab import (
    DecisionRateCurve,
    audrc,
    grid_kl,
    ingest_pairs,
    run_benchmark,
    run_estimator_benchmark,
)

__version__ = "0.1.0"

__all__ = [
    "FittedLSNM",
    "LogLikReport",
    "MeanVarParams",
    "NaturalParams",
    "SamplePair",
    "loglik_grad_hess_eta",
    "loglik_point",
    "meanvar_to_nat",
    "nat_to_meanvar",
    "SplineFeatureMap",
    "Standardizer",
    "build_spline_map",
    "standardize",
    "ConcaveFitConfig",
    "LinearLSNMWeights",
    "fisher_rank_check",
    "fit_concave",
    "fit_concave_design",
    "fit_spline_anm",
    "wls_update_w1",
    "MLPConfig",
    "MLPParams",
    "fit_mlp",
    "fit_mlp_anm",
    "mlp_forward",
    "IFGLSConfig",
    "fit_ifgls",
    "HsicResult",
    "hsic_pvalue",
    "hsic_statistic",
    "residuals",
    "DirectionVerdict",
    "InferenceConfig",
    "anm_ablation",
    "loci_h",
    "loci_m",
    "GeneratorSpec",
    "LabeledPair",
    "generate",
    "generate_corpus",
    "generate_with_truth",
    "DecisionRateCurve",
    "audrc",
    "grid_kl",
    "ingest_pairs",
    "run_benchmark",
    "run_estimator_benchmark",
]
