"""Stochastic gradient descent for linear classifiers, from scratch.

Single-example updates over a seeded per-epoch reshuffle, a pluggable
margin loss, an optional inverse-scaling step size, and l1 regularization
applied as a proximal soft-threshold after each update (so sparse weights
are exactly zero). Training is deterministic: the same data and config
produce bit-identical models.

Labels are {0, 1} at the API boundary and mapped to {-1, +1} internally
for the margin losses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .gaussmodel import GaussianClassParams, LabeledDataset, LinearModel, sample_dataset

__all__ = [
    "LOSSES",
    "SgdConfig",
    "TrainedRun",
    "TrainingDivergedError",
    "loss_value_and_gradient",
    "train_sgd",
    "train_many",
    "derive_seed",
]

_SEED_MASK = (1 << 64) - 1

LOSSES = ("logistic", "hinge", "squared-hinge", "modified-huber", "perceptron")

_SCHEDULES = ("constant", "inverse-scaling")


def derive_seed(master_seed: int, *path: int) -> int:
    """Deterministic 64-bit substream seed for (master_seed, path...).

    Independent of worker count or evaluation order by construction: the
    seed depends only on the coordinates, never on global RNG state.
    """
    ss = np.random.SeedSequence([int(master_seed) & _SEED_MASK, *[int(p) for p in path]])
    return int(ss.generate_state(1, np.uint64)[0])


class TrainingDivergedError(RuntimeError):
    """Raised when any parameter becomes non-finite during training."""

    def __init__(self, epoch: int, run: int | None = None):
        where = f"training diverged at epoch {epoch}"
        if run is not None:
            where = f"run {run}: {where}"
        super().__init__(where)
        self.epoch = epoch
        self.run = run


@dataclass(frozen=True)
class SgdConfig:
    """Free parameters of the training procedure.

    Defaults are fixed and documented rather than tuned per dataset:
    logistic loss, 50 epochs, eta0 = 0.01 decayed as eta0 / t**power_t
    over the global update counter t, zero initialization, no l2 term.
    """

    loss: str = "logistic"
    epochs: int = 50
    eta0: float = 0.01
    schedule: str = "inverse-scaling"
    power_t: float = 0.25
    l1_lambda: float = 0.0
    shuffle_seed: int = 0
    init: str = "zeros"

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}; expected one of {LOSSES}")
        if self.schedule not in _SCHEDULES:
            raise ValueError(
                f"unknown schedule {self.schedule!r}; expected one of {_SCHEDULES}"
            )
        if self.init != "zeros":
            raise ValueError("only zero initialization is supported")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.l1_lambda < 0:
            raise ValueError("l1_lambda must be non-negative")


@dataclass(frozen=True)
class TrainedRun:
    model: LinearModel
    final_train_loss: float
    epochs_run: int
    seed: int


def _loss_and_dloss(loss: str, margin: float) -> tuple[float, float]:
    """Per-example loss and its derivative w.r.t. the score, at margin = y~ * s.

    Returns (value, d value / d margin); the gradient w.r.t. the score is
    y~ times the second entry.
    """
    m = margin
    if loss == "logistic":
        # log(1 + exp(-m)) evaluated stably on both tails
        if m >= 0:
            e = math.exp(-m)
            return math.log1p(e), -e / (1.0 + e)
        e = math.exp(m)
        return -m + math.log1p(e), -1.0 / (1.0 + e)
    if loss == "hinge":
        # <= so a zero-margin point (e.g. at zero init) still updates
        if m <= 1.0:
            return 1.0 - m, -1.0
        return 0.0, 0.0
    if loss == "squared-hinge":
        if m < 1.0:
            return (1.0 - m) ** 2, -2.0 * (1.0 - m)
        return 0.0, 0.0
    if loss == "modified-huber":
        if m >= 1.0:
            return 0.0, 0.0
        if m >= -1.0:
            return (1.0 - m) ** 2, -2.0 * (1.0 - m)
        return -4.0 * m, -4.0
    if loss == "perceptron":
        # <= so the all-zero initial model updates on its first example
        if m <= 0.0:
            return -m, -1.0
        return 0.0, 0.0
    raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")


def loss_value_and_gradient(
    loss: str, model: LinearModel, x: np.ndarray, y: int
) -> tuple[float, np.ndarray]:
    """Per-example loss and gradient w.r.t. (weights, bias).

    ``y`` is a {0, 1} label; the returned gradient stacks the weight
    gradient followed by the bias gradient in one (d+1)-vector.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    y_pm = 1.0 if y == 1 else -1.0
    s = float(np.dot(model.weights, x)) + model.bias
    value, dmargin = _loss_and_dloss(loss, y_pm * s)
    dscore = y_pm * dmargin
    grad = np.empty(x.shape[0] + 1)
    grad[:-1] = dscore * x
    grad[-1] = dscore
    return value, grad


def _mean_loss(loss: str, w: np.ndarray, b: float, x: np.ndarray, y_pm: np.ndarray) -> float:
    margins = y_pm * (x @ w + b)
    if loss == "logistic":
        return float(np.mean(np.logaddexp(0.0, -margins)))
    if loss == "hinge":
        return float(np.mean(np.maximum(0.0, 1.0 - margins)))
    if loss == "squared-hinge":
        return float(np.mean(np.maximum(0.0, 1.0 - margins) ** 2))
    if loss == "modified-huber":
        vals = np.where(
            margins >= -1.0, np.maximum(0.0, 1.0 - margins) ** 2, -4.0 * margins
        )
        return float(np.mean(vals))
    if loss == "perceptron":
        return float(np.mean(np.maximum(0.0, -margins)))
    raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")


def train_sgd(data: LabeledDataset, cfg: SgdConfig) -> TrainedRun:
    """Train a linear model by single-example SGD.

    One pass per epoch over a freshly seeded shuffle; the step size at the
    t-th update (t counted across epochs, starting at 1) is eta0 for the
    constant schedule and eta0 / t**power_t for inverse scaling. When
    l1_lambda > 0, weights are soft-thresholded by eta_t * l1_lambda after
    every update; the bias term is never penalized.
    """
    x = np.ascontiguousarray(data.features)
    y_pm = np.where(data.labels == 1, 1.0, -1.0)
    if np.all(data.labels == data.labels[0]):
        raise ValueError("degenerate class distribution: both classes must be present")
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    rng = np.random.default_rng(int(cfg.shuffle_seed) & _SEED_MASK)
    loss = cfg.loss
    eta0 = cfg.eta0
    inverse = cfg.schedule == "inverse-scaling"
    power_t = cfg.power_t
    lam = cfg.l1_lambda
    t = 1
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for i in order:
            xi = x[i]
            yi = y_pm[i]
            s = float(xi @ w) + b
            _, dmargin = _loss_and_dloss(loss, yi * s)
            eta = eta0 / t**power_t if inverse else eta0
            if dmargin != 0.0:
                dscore = yi * dmargin
                w -= (eta * dscore) * xi
                b -= eta * dscore
            if lam > 0.0:
                w = np.sign(w) * np.maximum(np.abs(w) - eta * lam, 0.0)
            t += 1
        if not (np.all(np.isfinite(w)) and math.isfinite(b)):
            raise TrainingDivergedError(epoch)
    model = LinearModel(weights=w, bias=b)
    return TrainedRun(
        model=model,
        final_train_loss=_mean_loss(loss, w, b, x, y_pm),
        epochs_run=cfg.epochs,
        seed=cfg.shuffle_seed,
    )


def train_many(
    source: GaussianClassParams | LabeledDataset,
    n: int,
    runs: int,
    cfg: SgdConfig,
    master_seed: int,
) -> list[TrainedRun]:
    """Repeat training over fresh samples or fresh shuffles.

    Given generative params, each run draws its own n-sample training set
    from the substream (master_seed, run, 0) and shuffles with
    (master_seed, run, 1); given a fixed dataset, only the shuffle seed
    varies. Results are ordered by run index.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    results = []
    for run in range(runs):
        if isinstance(source, GaussianClassParams):
            train = sample_dataset(source, n, derive_seed(master_seed, run, 0))
        else:
            train = source
        run_cfg = replace(cfg, shuffle_seed=derive_seed(master_seed, run, 1))
        try:
            results.append(train_sgd(train, run_cfg))
        except TrainingDivergedError as exc:
            raise TrainingDivergedError(exc.epoch, run=run) from exc
    return results
