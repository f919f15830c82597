"""Post-hoc bias mitigation for linear models.

Two approaches that edit a trained model's weights guided by feature
influence, plus an l1-regularization grid baseline that retrains instead:

* feature_parity  — zero the weakest features of whichever orientation is
  in the majority until positive- and negative-influence feature counts
  match, compensating the intercept for the removed mass.
* expert_search   — grid search over (alpha, beta) masks that keep only
  the alpha strongest positive and beta strongest negative influence
  features, minimizing absolute training bias subject to not increasing
  training 0-1 loss.
* l1_grid_baseline — retrain with l1 shrinkage over a lambda grid and
  select with the same objective and constraint.

Selection is integer-exact: bias objectives and loss constraints compare
prediction/error counts, never floating-point rates, so ties resolve
deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .gaussmodel import LabeledDataset, LinearModel
from .influence import InfluenceVector, rank_features
from .sgdtrain import SgdConfig, TrainingDivergedError, train_sgd

__all__ = [
    "ExpertSelection",
    "apply_mask",
    "feature_parity",
    "expert_search",
    "l1_grid_baseline",
]

# Beyond this many features the (alpha, beta) grid defaults to a coarse
# stride with local refinement instead of fully exhaustive search.
EXHAUSTIVE_DIM_LIMIT = 2000

PARITY_ADJUSTMENTS = ("mean-substitution", "literal-subtract")


@dataclass(frozen=True)
class ExpertSelection:
    """Winning (alpha, beta) mask with its training-set scorecard."""

    alpha: int
    beta: int
    model: LinearModel
    train_bias: float
    train_accuracy: float
    search_evaluations: int


def _check_dims(model: LinearModel, infl: InfluenceVector) -> None:
    if model.dim != infl.dim:
        raise ValueError(
            f"influence vector has {infl.dim} entries but the model has "
            f"{model.dim} weights"
        )


def apply_mask(
    model: LinearModel, infl: InfluenceVector, alpha: int, beta: int
) -> LinearModel:
    """Keep only the strongest influence features; zero the rest.

    The surviving set is the top-``alpha`` positive-influence features and
    the top-``beta`` negative-influence features under ``rank_features``
    ordering. Kept weights and the bias term are copied through untouched.
    """
    _check_dims(model, infl)
    positive, negative = rank_features(infl)
    if not (0 <= alpha <= len(positive)):
        raise ValueError(
            f"alpha must be in [0, {len(positive)}], got {alpha}"
        )
    if not (0 <= beta <= len(negative)):
        raise ValueError(
            f"beta must be in [0, {len(negative)}], got {beta}"
        )
    weights = np.zeros_like(model.weights)
    keep = positive[:alpha] + negative[:beta]
    weights[keep] = model.weights[keep]
    return LinearModel(weights=weights, bias=model.bias)


def feature_parity(
    model: LinearModel,
    infl: InfluenceVector,
    feature_means: np.ndarray,
    adjustment: str = "mean-substitution",
) -> LinearModel:
    """Equalize positive- and negative-influence feature counts.

    Whichever orientation has more features loses its lowest-|influence|
    members (ties by ascending index) until the counts match. For each
    removed feature j the intercept absorbs the feature's average
    contribution: ``mean-substitution`` adds weights[j] * feature_means[j]
    (equivalent to pinning the feature at its training mean, preserving
    the expected score), while ``literal-subtract`` subtracts that product
    instead. ``feature_means`` should come from the training split.
    """
    _check_dims(model, infl)
    if adjustment not in PARITY_ADJUSTMENTS:
        raise ValueError(
            f"adjustment must be one of {PARITY_ADJUSTMENTS}, got {adjustment!r}"
        )
    means = np.asarray(feature_means, dtype=float)
    if means.shape != model.weights.shape:
        raise ValueError(
            f"feature_means has shape {means.shape}, expected "
            f"{model.weights.shape}"
        )

    values = infl.values
    pos = np.flatnonzero(values > 0.0)
    neg = np.flatnonzero(values < 0.0)
    excess = len(pos) - len(neg)
    if excess == 0:
        return LinearModel(weights=model.weights.copy(), bias=model.bias)

    majority = pos if excess > 0 else neg
    # Weakest |influence| first; flatnonzero output is already index-ascending,
    # and a stable sort keeps it that way among equal magnitudes.
    order = majority[np.argsort(np.abs(values[majority]), kind="stable")]
    removed = order[: abs(excess)]

    weights = model.weights.copy()
    shift = float(np.sum(weights[removed] * means[removed]))
    weights[removed] = 0.0
    bias = model.bias + shift if adjustment == "mean-substitution" else model.bias - shift
    return LinearModel(weights=weights, bias=bias)


def _prediction_counts(
    pos_prefix: np.ndarray,
    neg_prefix: np.ndarray,
    bias: float,
    labels: np.ndarray,
    alphas: np.ndarray,
    betas: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Predicted-positive and error counts for every (alpha, beta) pair.

    ``pos_prefix[i, a]`` holds the summed score contribution of the top-a
    positive features on row i (column 0 is zero), and likewise for
    ``neg_prefix``; a cell's score vector is then one addition per row
    instead of a d-term dot product. Returns integer arrays of shape
    (len(alphas), len(betas)).
    """
    n_alpha, n_beta = len(alphas), len(betas)
    pred1 = np.empty((n_alpha, n_beta), dtype=np.int64)
    errors = np.empty((n_alpha, n_beta), dtype=np.int64)
    labels_col = labels[:, None]
    neg_cols = neg_prefix[:, betas]
    for row, alpha in enumerate(alphas):
        scores = (pos_prefix[:, alpha] + bias)[:, None] + neg_cols
        preds = scores > 0.0
        pred1[row] = np.count_nonzero(preds, axis=0)
        errors[row] = np.count_nonzero(preds != labels_col, axis=0)
    return pred1, errors


def _selection_key(
    pred1: int, errors: int, alpha: int, beta: int, n_positive_labels: int
) -> tuple[int, int, int, int, int]:
    # Minimized lexicographically: |bias|*n, error count (= maximize
    # accuracy), feature budget, then (alpha, beta) for a total order.
    return (abs(pred1 - n_positive_labels), errors, alpha + beta, alpha, beta)


def expert_search(
    model: LinearModel,
    infl: InfluenceVector,
    train: LabeledDataset,
    stride: int | None = None,
) -> ExpertSelection:
    """Find the (alpha, beta) mask minimizing absolute training bias.

    Candidates keep the top-alpha positive and top-beta negative influence
    features (see ``apply_mask``); a candidate is feasible when its
    training 0-1 error count does not exceed the unmasked model's. Ties in
    |bias| fall to higher accuracy, then fewer kept features, then
    lexicographic (alpha, beta).

    With ``stride=1`` every pair is evaluated. ``stride=None`` picks 1 for
    models up to 2000 features and ceil(d / 512) above that, in which case
    a stride-1 refinement pass around the coarse winner restores local
    exhaustiveness. The full mask (all features kept) is always on the
    grid, so the search cannot come back empty-handed.
    """
    _check_dims(model, infl)
    if train.dim != model.dim:
        raise ValueError(
            f"training data has {train.dim} features but the model has "
            f"{model.dim} weights"
        )
    if stride is None:
        stride = 1 if model.dim <= EXHAUSTIVE_DIM_LIMIT else math.ceil(model.dim / 512)
    if stride < 1:
        raise ValueError(f"stride must be a positive integer, got {stride}")

    positive, negative = rank_features(infl)
    n_pos_feats, n_neg_feats = len(positive), len(negative)
    labels = train.labels
    n_positive_labels = int(np.sum(labels))

    # Prefix sums of per-row feature contributions in ranked order.
    contrib = train.features * model.weights
    zero_col = np.zeros((train.n, 1))
    pos_prefix = np.hstack([zero_col, np.cumsum(contrib[:, positive], axis=1)])
    neg_prefix = np.hstack([zero_col, np.cumsum(contrib[:, negative], axis=1)])

    original_preds = model.predict(train.features)
    max_errors = int(np.sum(original_preds != labels))

    def axis_values(limit: int) -> np.ndarray:
        vals = list(range(0, limit + 1, stride))
        if vals[-1] != limit:
            vals.append(limit)
        return np.asarray(vals, dtype=np.int64)

    best_key: tuple[int, int, int, int, int] | None = None
    best_cell = (n_pos_feats, n_neg_feats)
    evaluations = 0

    def sweep(alphas: np.ndarray, betas: np.ndarray) -> None:
        nonlocal best_key, best_cell, evaluations
        pred1, errors = _prediction_counts(
            pos_prefix, neg_prefix, model.bias, labels, alphas, betas
        )
        evaluations += pred1.size
        feasible = errors <= max_errors
        for row, col in zip(*np.nonzero(feasible)):
            key = _selection_key(
                int(pred1[row, col]),
                int(errors[row, col]),
                int(alphas[row]),
                int(betas[col]),
                n_positive_labels,
            )
            if best_key is None or key < best_key:
                best_key = key
                best_cell = (int(alphas[row]), int(betas[col]))

    sweep(axis_values(n_pos_feats), axis_values(n_neg_feats))

    if stride > 1:
        # Local stride-1 pass around the coarse winner.
        a_star, b_star = best_cell
        local_a = np.arange(
            max(0, a_star - stride + 1), min(n_pos_feats, a_star + stride - 1) + 1
        )
        local_b = np.arange(
            max(0, b_star - stride + 1), min(n_neg_feats, b_star + stride - 1) + 1
        )
        sweep(local_a, local_b)

    alpha, beta = best_cell
    selected = apply_mask(model, infl, alpha, beta)
    preds = selected.predict(train.features)
    return ExpertSelection(
        alpha=alpha,
        beta=beta,
        model=selected,
        train_bias=float(np.mean(preds) - np.mean(labels)),
        train_accuracy=float(np.mean(preds == labels)),
        search_evaluations=evaluations,
    )


def l1_grid_baseline(
    train: LabeledDataset,
    cfg: SgdConfig,
    lambda_grid: list[float],
) -> tuple[LinearModel, float]:
    """Retrain with l1 shrinkage and pick the least-biased feasible model.

    One model is trained per grid value (same data, same shuffle seed;
    only the penalty strength varies). The unregularized model sets the
    0-1 loss ceiling, exactly as in ``expert_search``; among candidates
    under the ceiling the winner minimizes |training bias|, breaking ties
    by fewer errors and then by larger lambda (the sparser model). Grid
    values whose training diverges are skipped; if every value diverges
    or none is feasible, a ValueError explains that a lambda of 0 in the
    grid guarantees a fallback.
    """
    if len(lambda_grid) == 0:
        raise ValueError("lambda_grid must be non-empty")
    if any(lam < 0 for lam in lambda_grid):
        raise ValueError("lambda_grid values must be non-negative")

    reference = train_sgd(train, replace(cfg, l1_lambda=0.0)).model
    labels = train.labels
    n_positive_labels = int(np.sum(labels))
    ref_preds = reference.predict(train.features)
    max_errors = int(np.sum(ref_preds != labels))

    best: tuple[tuple[int, int, float], float, LinearModel] | None = None
    diverged = 0
    for lam in lambda_grid:
        if lam == 0.0:
            candidate = reference
        else:
            try:
                candidate = train_sgd(train, replace(cfg, l1_lambda=float(lam))).model
            except TrainingDivergedError:
                diverged += 1
                continue
        preds = candidate.predict(train.features)
        errors = int(np.sum(preds != labels))
        if errors > max_errors:
            continue
        # Larger lambda wins ties: negate it so tuple-min prefers sparser.
        key = (abs(int(np.sum(preds)) - n_positive_labels), errors, -float(lam))
        if best is None or key < best[0]:
            best = (key, float(lam), candidate)

    if best is None:
        detail = (
            "every grid value diverged during training"
            if diverged == len(lambda_grid)
            else "no grid value met the training-loss constraint"
        )
        raise ValueError(
            f"{detail}; include 0.0 in lambda_grid to guarantee a fallback"
        )
    _, chosen, model = best
    return model, chosen
