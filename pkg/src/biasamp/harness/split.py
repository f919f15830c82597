"""Deterministic stratified train/test splitting."""

from __future__ import annotations

import math

import numpy as np

from ..gaussmodel import LabeledDataset

__all__ = ["stratified_split", "standardize_pair"]

_SEED_MASK = (1 << 64) - 1


def stratified_split(
    data: LabeledDataset, test_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Split per-class proportionally into (train, test).

    The test set receives round(n * test_fraction) rows, allocated across
    classes by largest-remainder rounding of each class's exact quota
    n_c * test_fraction: every class first gets the floor of its quota,
    and leftover seats go to the classes with the largest fractional
    remainders (ties to the smaller label). Membership within a class is a
    seeded permutation, so the split is a pure function of (data,
    test_fraction, seed); row order within each half follows the original
    dataset. Raises when any class would end up absent from either half.
    """
    if not (0.0 < test_fraction < 1.0):
        raise ValueError("test_fraction must lie strictly in (0, 1)")
    labels = data.labels
    class_labels = [0, 1]
    counts = {c: int(np.sum(labels == c)) for c in class_labels}
    for c in class_labels:
        if counts[c] < 2:
            raise ValueError(
                f"class {c} has {counts[c]} rows; need at least 2 per class to split"
            )

    total_test = int(math.floor(data.n * test_fraction + 0.5))
    quotas = {c: counts[c] * test_fraction for c in class_labels}
    take = {c: int(math.floor(quotas[c])) for c in class_labels}
    leftover = total_test - sum(take.values())
    # Largest fractional remainder first; label index breaks ties.
    order = sorted(class_labels, key=lambda c: (-(quotas[c] - take[c]), c))
    for c in order[:leftover]:
        take[c] += 1

    for c in class_labels:
        if not (1 <= take[c] <= counts[c] - 1):
            raise ValueError(
                f"test_fraction {test_fraction} allocates {take[c]} of class "
                f"{c}'s {counts[c]} rows to the test set, leaving one half empty"
            )

    rng = np.random.default_rng(int(seed) & _SEED_MASK)
    test_mask = np.zeros(data.n, dtype=bool)
    for c in class_labels:
        members = np.flatnonzero(labels == c)
        picked = rng.permutation(members)[: take[c]]
        test_mask[picked] = True

    train = LabeledDataset(
        features=data.features[~test_mask], labels=labels[~test_mask]
    )
    test = LabeledDataset(features=data.features[test_mask], labels=labels[test_mask])
    return train, test


def standardize_pair(
    train: LabeledDataset, test: LabeledDataset
) -> tuple[LabeledDataset, LabeledDataset]:
    """Standardize both halves using the training half's statistics.

    Zero-variance training columns are centered but not scaled. This is
    the leak-free counterpart of ``load_csv(..., standardize=True)``.
    """
    if train.dim != test.dim:
        raise ValueError("train and test must share a feature dimension")
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std[std == 0.0] = 1.0
    return (
        LabeledDataset(features=(train.features - mean) / std, labels=train.labels),
        LabeledDataset(features=(test.features - mean) / std, labels=test.labels),
    )
