"""biasamp: bias-amplification analysis and mitigation for binary linear classifiers.

The core library lives in five modules:

* ``gaussmodel`` — the Gaussian generative model, naive-Bayes fitting, the
  Bayes-optimal linear classifier, and the closed-form bias curve.
* ``sgdtrain``   — from-scratch SGD for linear classifiers with pluggable
  margin losses and proximal l1 shrinkage.
* ``metrics``    — bias amplification, systematic-bias estimation, feature
  asymmetry, and weak-coefficient overestimation.
* ``influence``  — the (feature map, linear head) slice abstraction and
  distributional influence.
* ``mitigate``   — feature parity, influence-directed expert search, and
  the l1 grid baseline.

``biasamp.harness`` (imported explicitly) adds file formats, stratified
splitting, experiment configs, and the ``biasamp`` command-line tool.
"""

from .gaussmodel import (
    GaussianClassParams,
    LabeledDataset,
    LinearModel,
    bayes_optimal_model,
    fit_gnb,
    mahalanobis_distance,
    make_asymmetric_params,
    sample_dataset,
    std_normal_cdf,
    theoretical_bias,
)
from .influence import (
    FEATURE_SOURCES,
    InfluenceVector,
    Slice,
    distributional_influence,
    rank_features,
)
from .metrics import (
    BiasReport,
    SystematicBiasEstimate,
    bias_amplification,
    feature_asymmetry,
    systematic_bias,
    weak_overestimation,
)
from .mitigate import (
    PARITY_ADJUSTMENTS,
    ExpertSelection,
    apply_mask,
    expert_search,
    feature_parity,
    l1_grid_baseline,
)
from .sgdtrain import (
    LOSSES,
    SgdConfig,
    TrainedRun,
    TrainingDivergedError,
    derive_seed,
    loss_value_and_gradient,
    train_many,
    train_sgd,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "GaussianClassParams",
    "LabeledDataset",
    "LinearModel",
    "bayes_optimal_model",
    "fit_gnb",
    "mahalanobis_distance",
    "make_asymmetric_params",
    "sample_dataset",
    "std_normal_cdf",
    "theoretical_bias",
    "FEATURE_SOURCES",
    "InfluenceVector",
    "Slice",
    "distributional_influence",
    "rank_features",
    "BiasReport",
    "SystematicBiasEstimate",
    "bias_amplification",
    "feature_asymmetry",
    "systematic_bias",
    "weak_overestimation",
    "PARITY_ADJUSTMENTS",
    "ExpertSelection",
    "apply_mask",
    "expert_search",
    "feature_parity",
    "l1_grid_baseline",
    "LOSSES",
    "SgdConfig",
    "TrainedRun",
    "TrainingDivergedError",
    "derive_seed",
    "loss_value_and_gradient",
    "train_many",
    "train_sgd",
]
