"""Desk-scale dataset provisioning.

Datasets are immutable pairs of a feature matrix (examples x dims) and
integer class labels. Generators are deterministic per seed; the PRNG is
numpy's PCG64 via ``np.random.default_rng``, recorded in run manifests as
``numpy-pcg64`` so datasets can be reproduced exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (CenterPlacementFailure, LabelRange, ParseError,
                     TooFewExamples)

PRNG_ALGORITHM = "numpy-pcg64"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        f = self.features
        y = self.labels
        if f.ndim != 2:
            raise ValueError("features must be 2-D")
        if y.shape != (f.shape[0],):
            raise ValueError("labels must align with feature rows")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if len(y) and (y.min() < 0 or y.max() >= self.num_classes):
            raise ValueError("labels must lie in [0, num_classes)")

    def __len__(self):
        return self.features.shape[0]


def gen_blobs(seed, n_per_class, classes, dims, spread):
    """Gaussian clusters around random centers kept >= 4*spread apart.

    Centers are standard-normal draws accepted by rejection sampling (up to
    1000 candidates per center); each class then gets ``n_per_class`` points
    at isotropic standard deviation ``spread`` around its center.
    """
    if n_per_class < 1 or classes < 1 or dims < 1:
        raise ValueError("n_per_class, classes and dims must be positive")
    if spread <= 0.0:
        raise ValueError(f"spread must be > 0, got {spread}")
    rng = np.random.default_rng(seed)
    min_dist = 4.0 * spread
    centers = []
    for c in range(classes):
        for _ in range(1000):
            cand = rng.standard_normal(dims)
            if all(np.linalg.norm(cand - other) >= min_dist
                   for other in centers):
                centers.append(cand)
                break
        else:
            raise CenterPlacementFailure(
                f"could not place center {c} at distance {min_dist!r} "
                f"after 1000 attempts")
    feats = np.concatenate([
        centers[c] + spread * rng.standard_normal((n_per_class, dims))
        for c in range(classes)])
    labels = np.repeat(np.arange(classes, dtype=np.int64), n_per_class)
    return Dataset(feats, labels, classes)


def load_csv(path, label_column, has_header=False):
    """Read a dataset from CSV; one example per line, one column the label.

    Labels must be integral and form a contiguous 0-based range. Parse
    failures report the 1-indexed data row and column.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if has_header:
        lines = lines[1:]
    if not lines:
        raise ParseError(f"{path}: no data rows")
    width = len(lines[0].split(","))
    label_idx = label_column if label_column >= 0 else width + label_column
    if not 0 <= label_idx < width:
        raise ValueError(f"label column {label_column} out of range "
                         f"for {width} columns")
    feats, labels = [], []
    for r, line in enumerate(lines, start=1):
        cells = line.split(",")
        if len(cells) != width:
            raise ParseError(
                f"{path}: row {r} has {len(cells)} cells, expected {width}",
                row=r)
        row = []
        for c, cell in enumerate(cells, start=1):
            try:
                val = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: row {r}, column {c}: not a number: {cell!r}",
                    row=r, column=c)
            if not np.isfinite(val):
                raise ParseError(
                    f"{path}: row {r}, column {c}: non-finite value",
                    row=r, column=c)
            row.append(val)
        label = row.pop(label_idx)
        if label != int(label):
            raise ParseError(
                f"{path}: row {r}: label {label!r} is not an integer",
                row=r, column=label_idx + 1)
        feats.append(row)
        labels.append(int(label))
    labels = np.array(labels, dtype=np.int64)
    present = np.unique(labels)
    expected = np.arange(len(present))
    if labels.min() != 0 or not np.array_equal(present, expected):
        raise LabelRange(
            f"{path}: labels must be contiguous from 0, got {present.tolist()}")
    return Dataset(np.array(feats, dtype=np.float64), labels,
                   int(labels.max()) + 1)


def save_csv(path, dataset):
    """Write a dataset as CSV with the label in the last column."""
    with open(path, "w", encoding="ascii") as fh:
        for row, label in zip(dataset.features, dataset.labels):
            cells = [repr(x) for x in row.tolist()]
            cells.append(str(int(label)))
            fh.write(",".join(cells))
            fh.write("\n")


def split(dataset, val_fraction, seed):
    """Seeded stratified split into (train, validation).

    Per class, a seeded shuffle sends round(val_fraction * count) examples
    to validation (capped so every class keeps at least one training
    example); proportions are preserved within one example per class.
    """
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    rng = np.random.default_rng(seed)
    train_idx, val_idx = [], []
    for c in range(dataset.num_classes):
        idx = np.flatnonzero(dataset.labels == c)
        if len(idx) < 2:
            raise TooFewExamples(
                f"class {c} has {len(idx)} examples; need at least 2")
        perm = idx[rng.permutation(len(idx))]
        n_val = int(np.floor(val_fraction * len(idx) + 0.5))
        n_val = min(n_val, len(idx) - 1)
        val_idx.extend(perm[:n_val])
        train_idx.extend(perm[n_val:])
    train_idx = np.sort(np.array(train_idx, dtype=np.int64))
    val_idx = np.sort(np.array(val_idx, dtype=np.int64))
    make = lambda sel: Dataset(dataset.features[sel], dataset.labels[sel],
                               dataset.num_classes)
    return make(train_idx), make(val_idx)
