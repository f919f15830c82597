"""Gaussian generative model, naive-Bayes fitting, and closed-form bias.

The generative model used throughout: a binary label drawn Bernoulli(p),
and conditionally-independent Gaussian features whose per-class means are
``mu0`` / ``mu1`` and whose shared diagonal covariance is ``sigma``.

Convention: ``sigma`` holds **variances**, not standard deviations. Every
function in this package that accepts a dispersion parameter follows the
same convention; configs that sweep "feature noise" take explicit variance
values (a noise level quoted as a standard deviation s enters as s**2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianClassParams",
    "LabeledDataset",
    "LinearModel",
    "make_asymmetric_params",
    "sample_dataset",
    "fit_gnb",
    "bayes_optimal_model",
    "mahalanobis_distance",
    "std_normal_cdf",
    "theoretical_bias",
]

_SEED_MASK = (1 << 64) - 1


def _as_1d(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class GaussianClassParams:
    """Class-conditional Gaussian parameters with a shared diagonal covariance.

    ``sigma`` entries are variances and must be strictly positive; ``p`` is
    the probability of label 1 and must lie strictly inside (0, 1).
    """

    mu0: np.ndarray
    mu1: np.ndarray
    sigma: np.ndarray
    p: float

    def __post_init__(self):
        object.__setattr__(self, "mu0", _as_1d(self.mu0, "mu0"))
        object.__setattr__(self, "mu1", _as_1d(self.mu1, "mu1"))
        object.__setattr__(self, "sigma", _as_1d(self.sigma, "sigma"))
        object.__setattr__(self, "p", float(self.p))
        d = self.mu0.shape[0]
        if d < 1:
            raise ValueError("parameter dimension must be at least 1")
        if self.mu1.shape[0] != d or self.sigma.shape[0] != d:
            raise ValueError(
                "mu0, mu1 and sigma must share one dimension, got "
                f"{d}, {self.mu1.shape[0]}, {self.sigma.shape[0]}"
            )
        if not np.all(np.isfinite(self.mu0)) or not np.all(np.isfinite(self.mu1)):
            raise ValueError("class means must be finite")
        if not np.all(np.isfinite(self.sigma)) or not np.all(self.sigma > 0):
            raise ValueError("sigma entries must be finite and strictly positive")
        if not (0.0 < self.p < 1.0):
            raise ValueError("degenerate prior: p must lie strictly in (0, 1)")

    @property
    def dim(self) -> int:
        return self.mu0.shape[0]


@dataclass(frozen=True)
class LabeledDataset:
    """An n x d feature matrix with binary {0, 1} labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labs = np.asarray(self.labels)
        if feats.ndim != 2:
            raise ValueError(f"features must be an n x d matrix, got shape {feats.shape}")
        if feats.shape[0] < 1:
            raise ValueError("dataset must contain at least one row")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
            raise ValueError("labels must be a vector with one entry per row")
        if not np.all(np.isin(labs, (0, 1))):
            raise ValueError("labels must contain only 0 or 1")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs.astype(np.int64))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class LinearModel:
    """Linear classifier: predicts 1 exactly when weights . x + bias > 0."""

    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_1d(self.weights, "weights"))
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def score(self, features: np.ndarray) -> np.ndarray:
        """Logit score weights . x + bias for each row of ``features``."""
        return np.asarray(features, dtype=float) @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.score(features) > 0.0).astype(np.int64)


def make_asymmetric_params(
    num_weak: int,
    strong_var: float,
    weak_var: float,
    p: float,
) -> GaussianClassParams:
    """Build the feature-asymmetry regime with two strong features.

    The first two features are strongly predictive with variance
    ``strong_var``, one oriented toward each class; the remaining
    ``num_weak`` features all point toward class 1 with variance
    ``weak_var``. Both dispersion arguments are variances.
    """
    if num_weak < 0:
        raise ValueError("num_weak must be non-negative")
    d = 2 + num_weak
    mu0 = np.zeros(d)
    mu0[1] = 1.0
    mu1 = np.ones(d)
    mu1[1] = 0.0
    sigma = np.full(d, float(weak_var))
    sigma[0] = sigma[1] = float(strong_var)
    return GaussianClassParams(mu0=mu0, mu1=mu1, sigma=sigma, p=p)


def sample_dataset(params: GaussianClassParams, n: int, seed: int) -> LabeledDataset:
    """Draw n i.i.d. rows from the generative model.

    Labels come first from the stream, then one standard-normal block for
    the features, so identical seeds give bit-identical datasets.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(int(seed) & _SEED_MASK)
    labels = (rng.random(n) < params.p).astype(np.int64)
    noise = rng.standard_normal((n, params.dim))
    means = np.where(labels[:, None] == 1, params.mu1, params.mu0)
    features = means + noise * np.sqrt(params.sigma)
    return LabeledDataset(features=features, labels=labels)


def fit_gnb(data: LabeledDataset, variance_floor: float = 1e-9) -> GaussianClassParams:
    """Estimate Gaussian naive-Bayes parameters with a pooled diagonal covariance.

    Per-class per-feature sample means; the covariance is the pooled
    within-class variance (one estimate shared by both classes, matching
    the generative model's single covariance), clamped below by
    ``variance_floor`` so constant features cannot produce infinite
    weights downstream.
    """
    if variance_floor <= 0:
        raise ValueError("variance_floor must be positive")
    y = data.labels
    x = data.features
    n0 = int(np.sum(y == 0))
    n1 = int(np.sum(y == 1))
    if n0 == 0 or n1 == 0:
        raise ValueError("degenerate class distribution: both classes must be present")
    x0 = x[y == 0]
    x1 = x[y == 1]
    mu0 = x0.mean(axis=0)
    mu1 = x1.mean(axis=0)
    ss = ((x0 - mu0) ** 2).sum(axis=0) + ((x1 - mu1) ** 2).sum(axis=0)
    # Unbiased pooled denominator; singleton classes degrade to the floor.
    sigma = ss / max(n0 + n1 - 2, 1)
    sigma = np.maximum(sigma, variance_floor)
    return GaussianClassParams(mu0=mu0, mu1=mu1, sigma=sigma, p=n1 / (n0 + n1))


def bayes_optimal_model(params: GaussianClassParams) -> LinearModel:
    """Minimum-error linear classifier for the generative model.

    weights[j] = (mu1[j] - mu0[j]) / sigma[j] and the intercept places the
    boundary at the point where the class posteriors are equal, including
    the log prior odds term.
    """
    if not (0.0 < params.p < 1.0):
        raise ValueError("degenerate prior")
    diff = params.mu1 - params.mu0
    weights = diff / params.sigma
    bias = -0.5 * float(np.dot(weights, params.mu1 + params.mu0)) + math.log(
        params.p / (1.0 - params.p)
    )
    return LinearModel(weights=weights, bias=bias)


def mahalanobis_distance(params: GaussianClassParams) -> float:
    """Covariance-normalized distance between the class means."""
    diff = params.mu1 - params.mu0
    return math.sqrt(float(np.sum(diff * diff / params.sigma)))


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function.

    Accurate to well under 1e-12 absolute error over the real line, and
    satisfies the reflection identity cdf(-x) = 1 - cdf(x) to float
    rounding.
    """
    return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))


def theoretical_bias(p: float, d: float) -> float:
    """Closed-form bias of the optimal classifier at prior p and separation d.

    ``d`` is the Mahalanobis distance between the class means. At d = 0 the
    classifier carries no feature information and always predicts the prior
    mode, so the saturation limit is returned: 1 - p for p > 1/2, -p for
    p < 1/2, and 0 at p = 1/2.
    """
    if not (0.0 < p < 1.0):
        raise ValueError("p must lie strictly in (0, 1)")
    if d < 0:
        raise ValueError("distance must be non-negative")
    if d == 0.0:
        if p > 0.5:
            return 1.0 - p
        if p < 0.5:
            return -p
        return 0.0
    shift = -math.log(p / (1.0 - p)) / d
    return (
        1.0
        - p
        - (1.0 - p) * std_normal_cdf(shift + d / 2.0)
        - p * std_normal_cdf(shift - d / 2.0)
    )
