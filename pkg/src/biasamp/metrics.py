"""Bias amplification, accuracy, asymmetry, and overestimation statistics.

Bias amplification is the mean of (prediction - label): the rate at which
a classifier predicts class 1 in excess of the empirical label prior of
the evaluation set. The expectation over training sets is estimated by
Monte Carlo over independently drawn training runs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .gaussmodel import GaussianClassParams, LabeledDataset, LinearModel, sample_dataset
from .sgdtrain import SgdConfig, derive_seed, train_sgd

__all__ = [
    "BiasReport",
    "SystematicBiasEstimate",
    "bias_amplification",
    "systematic_bias",
    "feature_asymmetry",
    "weak_overestimation",
]


@dataclass(frozen=True)
class BiasReport:
    """Evaluation summary on one dataset; bias = rate - prior by construction."""

    bias: float
    accuracy: float
    predicted_positive_rate: float
    empirical_prior: float
    n: int


@dataclass(frozen=True)
class SystematicBiasEstimate:
    """Monte Carlo estimate of expected bias over training runs."""

    bias: float
    std_error: float
    predicted_positive_rate: float
    accuracy: float
    runs: int


def bias_amplification(model: LinearModel, data: LabeledDataset) -> BiasReport:
    """Measure prediction skew of ``model`` against the labels in ``data``."""
    preds = model.predict(data.features)
    rate = float(np.mean(preds))
    prior = float(np.mean(data.labels))
    return BiasReport(
        bias=rate - prior,
        accuracy=float(np.mean(preds == data.labels)),
        predicted_positive_rate=rate,
        empirical_prior=prior,
        n=data.n,
    )


def systematic_bias(
    params: GaussianClassParams,
    n: int,
    runs: int,
    cfg: SgdConfig,
    test_n: int,
    master_seed: int,
    trainer: Callable[[LabeledDataset], LinearModel] | None = None,
) -> SystematicBiasEstimate:
    """Expected bias of a learning rule on fresh training sets.

    Each run draws an n-sample training set and a test_n-sample test set
    from per-run substreams, trains (SGD under ``cfg`` by default, or the
    supplied ``trainer``), and measures bias on the test set. Returns the
    mean bias with its standard error across runs.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    biases = np.empty(runs)
    rates = np.empty(runs)
    accs = np.empty(runs)
    for run in range(runs):
        train = sample_dataset(params, n, derive_seed(master_seed, run, 0))
        test = sample_dataset(params, test_n, derive_seed(master_seed, run, 2))
        if trainer is None:
            model = train_sgd(
                train, replace(cfg, shuffle_seed=derive_seed(master_seed, run, 1))
            ).model
        else:
            model = trainer(train)
        report = bias_amplification(model, test)
        biases[run] = report.bias
        rates[run] = report.predicted_positive_rate
        accs[run] = report.accuracy
    se = float(np.std(biases, ddof=1) / np.sqrt(runs)) if runs > 1 else float("nan")
    return SystematicBiasEstimate(
        bias=float(np.mean(biases)),
        std_error=se,
        predicted_positive_rate=float(np.mean(rates)),
        accuracy=float(np.mean(accs)),
        runs=runs,
    )


def _orientations(thing: GaussianClassParams | LinearModel) -> np.ndarray:
    if isinstance(thing, GaussianClassParams):
        return thing.mu1 - thing.mu0
    return thing.weights


def feature_asymmetry(thing: GaussianClassParams | LinearModel) -> float:
    """Fraction of oriented features pointing toward class 1.

    A feature's orientation is the sign of its class-mean difference (for
    generative params) or of its weight (for a model). Features with
    exactly zero orientation are excluded from both numerator and
    denominator.
    """
    orient = _orientations(thing)
    nonzero = orient != 0.0
    total = int(np.sum(nonzero))
    if total == 0:
        raise ValueError("no oriented features")
    return float(np.sum(orient > 0.0) / total)


def weak_overestimation(
    model: LinearModel,
    reference: LinearModel,
    weak_indices: Sequence[int],
    per_feature: bool = False,
) -> float:
    """Total magnitude excess of the model's weak coefficients.

    Sums |model.weights[j]| - |reference.weights[j]| over ``weak_indices``;
    positive values mean the trained model gives the weak features more
    magnitude than the reference. ``per_feature=True`` returns the mean
    excess instead of the sum.
    """
    idx = np.asarray(list(weak_indices), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("weak_indices must be non-empty")
    if idx.min() < 0 or idx.max() >= model.dim or model.dim != reference.dim:
        raise ValueError("weak_indices out of bounds for the given models")
    excess = np.abs(model.weights[idx]) - np.abs(reference.weights[idx])
    return float(np.mean(excess)) if per_feature else float(np.sum(excess))
