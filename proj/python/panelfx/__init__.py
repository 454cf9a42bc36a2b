"""Python bindings for the panelfx estimation core."""

from ._core import (
    AnalysisWindow,
    EffectEstimate,
    EstimationResult,
    GroundTruth,
    Metric,
    Panel,
    RecoveryReport,
    RevenueImpact,
    SimConfig,
    SynthWeights,
    WeightMode,
    __version__,
    ad_impact,
    ecommerce_impact,
    estimate_effect,
    fit_weights,
    generate_panel,
    intensity_effect,
    load_panel,
    run_estimation,
    welch_t_test,
    window_bounds,
)

__all__ = [
    "AnalysisWindow",
    "EffectEstimate",
    "EstimationResult",
    "GroundTruth",
    "Metric",
    "Panel",
    "RecoveryReport",
    "RevenueImpact",
    "SimConfig",
    "SynthWeights",
    "WeightMode",
    "__version__",
    "ad_impact",
    "ecommerce_impact",
    "estimate_effect",
    "fit_weights",
    "generate_panel",
    "intensity_effect",
    "load_panel",
    "run_estimation",
    "welch_t_test",
    "window_bounds",
]
