from src.bench.dgm import (
    ConfoundedGaussian,
    CoverageModel,
    DiscreteNonAdditive,
    LinearGaussian,
    NonlinearHeteroskedastic,
    StructuralModel,
    model_for,
    simulate_dgm,
)
from src.bench.harness import apply_variant, run_coverage, run_hyper_sweep, run_mce
from src.bench.truth import NAMED_ESTIMANDS, PUBLISHED_TRUTHS, ground_truth, named_estimand
