"""Slice abstraction and distributional influence for linear final layers.

A slice pairs a feature map f with a linear scoring head g; the model under
study is h = g ∘ f. Feature maps are never executed here: either f is the
identity (native tabular features) or the rows of the dataset are already
f(x) exported from elsewhere ("precomputed"). Influence of feature j is the
average gradient of the pre-threshold logit with respect to feature j over
a distribution of interest — for a linear head that gradient is constant,
so the influence vector equals the weight vector exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussmodel import LabeledDataset, LinearModel

__all__ = [
    "Slice",
    "InfluenceVector",
    "distributional_influence",
    "rank_features",
]

FEATURE_SOURCES = ("identity", "precomputed")


@dataclass(frozen=True)
class Slice:
    """A (feature map, linear head) pair; ``feature_dim`` is the head's input width."""

    feature_source: str
    g: LinearModel
    feature_dim: int

    def __post_init__(self) -> None:
        if self.feature_source not in FEATURE_SOURCES:
            raise ValueError(
                f"feature_source must be one of {FEATURE_SOURCES}, "
                f"got {self.feature_source!r}"
            )
        if self.g.dim != self.feature_dim:
            raise ValueError(
                f"final layer has {self.g.dim} weights but feature_dim is "
                f"{self.feature_dim}"
            )

    @classmethod
    def from_model(cls, model: LinearModel) -> "Slice":
        """Wrap a native linear model as an identity-feature slice."""
        return cls(feature_source="identity", g=model, feature_dim=model.dim)


@dataclass(frozen=True)
class InfluenceVector:
    """Per-feature influence values plus a tag for the distribution they average over."""

    values: np.ndarray
    distribution_id: str

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("influence values must be a 1-d vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("influence values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


def distributional_influence(
    slice_: Slice, data: LabeledDataset, distribution: str = "train"
) -> InfluenceVector:
    """Average logit gradient per feature over the rows of ``data``.

    ``data`` supplies the empirical distribution of interest (its rows are
    f(x) for precomputed sources). The head is linear, so the average is
    independent of the rows and equals the head's weights exactly; the data
    argument is still validated so a dimension mismatch fails loudly.
    ``distribution`` labels which split the rows came from (e.g. "train"
    or "test") and is recorded in the result.
    """
    if data.dim != slice_.feature_dim:
        raise ValueError(
            f"data has {data.dim} features but the slice expects "
            f"{slice_.feature_dim}"
        )
    return InfluenceVector(
        values=slice_.g.weights.copy(),
        distribution_id=f"empirical:{distribution}:n={data.n}",
    )


def rank_features(infl: InfluenceVector) -> tuple[list[int], list[int]]:
    """Order features by influence, split by sign.

    Returns (positive, negative): indices with positive influence sorted by
    descending value, and indices with negative influence sorted by
    ascending value (most negative first). Zero-influence features appear
    in neither list; equal values are ordered by ascending feature index.
    """
    values = infl.values
    idx = np.arange(values.shape[0])
    pos = idx[values > 0.0]
    neg = idx[values < 0.0]
    # lexsort's last key is primary; the index key settles ties stably.
    pos = pos[np.lexsort((pos, -values[pos]))]
    neg = neg[np.lexsort((neg, values[neg]))]
    return [int(j) for j in pos], [int(j) for j in neg]
