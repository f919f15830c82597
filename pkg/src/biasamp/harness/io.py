"""File formats: dataset CSVs, model persistence, slice import, result output.

Datasets are CSVs with a header row; one column holds a binary label
({0,1} natively, or {-1,+1} which is mapped to {0,1}). Models persist as
plain text, line-oriented: the dimension, then one weight per line in full
precision, then the bias — diffable and trivially parseable from any
language. Result CSVs open with ``#``-prefixed metadata lines (config
hash, seed, tool version) so every output file records its provenance.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from ..gaussmodel import LabeledDataset, LinearModel
from ..influence import Slice

__all__ = [
    "DataFormatError",
    "load_csv",
    "load_slice",
    "save_model",
    "load_model",
    "write_results_csv",
    "read_results_csv",
]


class DataFormatError(ValueError):
    """An input file that does not match its documented format."""


def _resolve_label_column(header: list[str], label_column: str | int) -> int:
    if isinstance(label_column, str) and label_column in header:
        return header.index(label_column)
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise DataFormatError(
            f"label column {label_column!r} not found in header {header}"
        ) from None
    if not (-len(header) <= idx < len(header)):
        raise DataFormatError(
            f"label column index {idx} out of range for {len(header)} columns"
        )
    return idx % len(header)


def load_csv(
    path: str | Path,
    label_column: str | int = "label",
    standardize: bool = False,
    orient_majority: bool = True,
) -> LabeledDataset:
    """Read a header-ed CSV into a LabeledDataset.

    ``label_column`` is a header name or a (possibly negative) column
    index. Labels must be binary: {0,1} are taken as-is and {-1,+1} map to
    {0,1}. With ``orient_majority`` (the default) labels are flipped when
    class 0 is the majority, so the majority class is always labeled 1 —
    the convention under which a positive bias means majority-skew. Pass
    ``orient_majority=False`` to preserve the file's labeling (required
    when the labels must stay aligned with an externally trained model).

    ``standardize`` rescales each feature column to zero mean and unit
    variance using this file's own statistics; when a later train/test
    split must not share statistics, leave it off and standardize the
    splits instead (``split.standardize_pair``).
    """
    p = Path(path)
    if not p.is_file():
        raise DataFormatError(f"dataset file not found: {p}")
    with p.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{p}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        label_idx = _resolve_label_column(header, label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]

        raw_labels: list[float] = []
        rows: list[list[float]] = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise DataFormatError(
                    f"{p}:{lineno}: expected {len(header)} fields, got {len(record)}"
                )
            parsed = []
            for col, cell in enumerate(record):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{p}:{lineno}: non-numeric value {cell.strip()!r} in "
                        f"column {header[col]!r}"
                    ) from None
            raw_labels.append(parsed[label_idx])
            rows.append([v for i, v in enumerate(parsed) if i != label_idx])

    if not rows:
        raise DataFormatError(f"{p}: no data rows after the header")
    if not feature_names:
        raise DataFormatError(f"{p}: no feature columns besides the label")

    labels = np.asarray(raw_labels)
    distinct = sorted(set(labels.tolist()))
    if distinct in ([-1.0, 1.0], [-1.0], [1.0]) and -1.0 in distinct:
        labels = (labels > 0).astype(np.int64)
    elif set(distinct) <= {0.0, 1.0}:
        labels = labels.astype(np.int64)
    else:
        shown = ", ".join(repr(v) for v in distinct[:8])
        raise DataFormatError(
            f"{p}: label column must be binary ({{0,1}} or {{-1,+1}}); "
            f"found values [{shown}]"
        )

    if orient_majority and float(np.mean(labels)) < 0.5:
        labels = 1 - labels

    features = np.asarray(rows, dtype=float)
    if standardize:
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        std[std == 0.0] = 1.0
        features = (features - mean) / std
    return LabeledDataset(features=features, labels=labels)


def save_model(model: LinearModel, path: str | Path) -> Path:
    """Write the line-oriented model file: dimension, weights, bias."""
    p = Path(path)
    lines = [str(model.dim)]
    lines.extend(repr(float(w)) for w in model.weights)
    lines.append(repr(float(model.bias)))
    p.write_text("\n".join(lines) + "\n")
    return p


def load_model(path: str | Path) -> LinearModel:
    """Read a model written by ``save_model``; exact round-trip."""
    p = Path(path)
    if not p.is_file():
        raise DataFormatError(f"model file not found: {p}")
    lines = [ln.strip() for ln in p.read_text().splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError(f"{p}: empty model file")
    try:
        dim = int(lines[0])
    except ValueError:
        raise DataFormatError(
            f"{p}:1: expected the dimension as an integer, got {lines[0]!r}"
        ) from None
    if dim < 1:
        raise DataFormatError(f"{p}:1: dimension must be positive, got {dim}")
    if len(lines) != dim + 2:
        raise DataFormatError(
            f"{p}: declared {dim} weights plus a bias ({dim + 2} lines), "
            f"found {len(lines)} lines"
        )
    values = []
    for lineno, text in enumerate(lines[1:], start=2):
        try:
            values.append(float(text))
        except ValueError:
            raise DataFormatError(
                f"{p}:{lineno}: non-numeric value {text!r}"
            ) from None
    return LinearModel(weights=np.asarray(values[:-1]), bias=values[-1])


def load_slice(
    weights_path: str | Path,
    features_path: str | Path,
    label_column: str | int = "label",
) -> tuple[Slice, LabeledDataset]:
    """Import an externally computed final layer and its feature matrix.

    The weights file is the ``save_model`` format; the features file is a
    CSV whose rows are the extractor outputs f(x) plus a label column.
    Labels are taken verbatim (no majority re-orientation): they must stay
    aligned with what the imported layer was trained to predict.
    """
    model = load_model(weights_path)
    data = load_csv(
        features_path,
        label_column=label_column,
        standardize=False,
        orient_majority=False,
    )
    if data.dim != model.dim:
        raise DataFormatError(
            f"dimension mismatch: weight vector has {model.dim} entries but "
            f"{features_path} has {data.dim} feature columns"
        )
    return Slice(feature_source="precomputed", g=model, feature_dim=model.dim), data


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_results_csv(
    path: str | Path,
    columns: list[str],
    rows: list[tuple],
    meta: dict[str, str],
) -> Path:
    """Write an output CSV with ``# key: value`` provenance lines on top.

    Floats are written with ``repr`` (shortest round-trip form), so the
    body is byte-identical across repeated runs of the same config/seed.
    """
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    p.write_text(buf.getvalue())
    return p


def read_results_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Inverse of ``write_results_csv``: (metadata, columns, string rows)."""
    p = Path(path)
    meta: dict[str, str] = {}
    body: list[str] = []
    for line in p.read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    reader = csv.reader(body)
    table = [row for row in reader if row]
    if not table:
        raise DataFormatError(f"{p}: no header row in results file")
    return meta, table[0], table[1:]
