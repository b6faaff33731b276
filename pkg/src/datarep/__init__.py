"""Dataset representativeness analysis.

Train a domain classifier to tell a training dataset from an unseen one,
derive the proxy A-distance from its held-out error, fit a Beta
distribution to its pooled probabilities, and form the data
representativeness criterion (DRC) against fixed benchmark priors to
predict whether a supervised model built on the training data will
generalize to the unseen data.
"""

__version__ = "0.1.0"

from .classifier import (
    ClassifierModel,
    DEFAULT_FOLDS,
    DEFAULT_LAMBDA_GRID,
    DomainFitResult,
    cross_validate,
    train_logistic,
)
from .core import (
    BetaParams,
    ComparisonReport,
    Dataset,
    DomainTag,
    DrcConfig,
    DrcOutcome,
    DrcStatus,
    ProbabilitySet,
    Verdict,
    validate_dataset,
)
from .estimator import RepresentativenessAnalyzer, compare_datasets
from .harness import (
    Condition,
    FilePairSpec,
    LabeledArraysSpec,
    SweepResult,
    TurningPointResult,
    run_similarity_sweep,
    run_turning_point,
)
from .ingest import (
    GrayImage,
    PatchSpec,
    extract_patches,
    images_to_dataset,
    load_csv,
    load_image,
    load_image_dir,
    load_pgm,
    save_csv,
    save_pgm,
)
from .similarity import (
    drc,
    drc_from_params,
    fit_beta_mle,
    kl_beta,
    moment_estimate,
    proxy_a_distance,
    verdict,
)
from .synthgen import (
    AcquisitionTransform,
    GaussianPairSpec,
    PhantomPairSpec,
    gen_gaussian_pair,
    gen_phantom_pair,
)

__all__ = [
    "AcquisitionTransform",
    "BetaParams",
    "ClassifierModel",
    "ComparisonReport",
    "Condition",
    "DEFAULT_FOLDS",
    "DEFAULT_LAMBDA_GRID",
    "Dataset",
    "DomainFitResult",
    "DomainTag",
    "DrcConfig",
    "DrcOutcome",
    "DrcStatus",
    "FilePairSpec",
    "GaussianPairSpec",
    "GrayImage",
    "LabeledArraysSpec",
    "PatchSpec",
    "PhantomPairSpec",
    "ProbabilitySet",
    "RepresentativenessAnalyzer",
    "SweepResult",
    "TurningPointResult",
    "Verdict",
    "compare_datasets",
    "cross_validate",
    "drc",
    "drc_from_params",
    "extract_patches",
    "fit_beta_mle",
    "gen_gaussian_pair",
    "gen_phantom_pair",
    "images_to_dataset",
    "kl_beta",
    "load_csv",
    "load_image",
    "load_image_dir",
    "load_pgm",
    "moment_estimate",
    "proxy_a_distance",
    "run_similarity_sweep",
    "run_turning_point",
    "save_csv",
    "save_pgm",
    "train_logistic",
    "validate_dataset",
    "verdict",
]
