"""Synthetic datasets, feature-space corruptions and prediction files.

Prediction files are CSV with header ``y0,...,y{k-1},label``: one row of
raw logits plus the integer true label per sample.  Values are written
with 17 significant digits so a save/load cycle is bit-exact.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.datasets import make_blobs as _sk_blobs
from sklearn.datasets import make_moons as _sk_moons

from .exceptions import DataError, InvalidParameterError, ParseError, ShapeError

# severity 0..5 -> corruption parameter
SEVERITY_TABLES = {
    "rotation": (0.0, 15.0, 30.0, 45.0, 60.0, 75.0),  # degrees
    "shear": (0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
    "zoom": (1.0, 1.2, 1.4, 1.6, 1.8, 2.0),
    "brightness": (0.0, 0.25, 0.5, 0.75, 1.0, 1.25),
}
CORRUPTION_KINDS = tuple(SEVERITY_TABLES)


@dataclass
class PredictionSet:
    """Raw prediction vectors (logits) with true labels."""

    logits: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.logits = np.asarray(self.logits, dtype=float)
        if self.logits.ndim != 2:
            raise ShapeError(f"logits must be 2-D, got shape {self.logits.shape}")
        self.labels = np.asarray(self.labels, dtype=int).ravel()
        if self.labels.shape[0] != self.logits.shape[0]:
            raise ShapeError("logits and labels differ in length")

    def __len__(self):
        return self.logits.shape[0]

    @property
    def n_classes(self):
        return self.logits.shape[1]

    @property
    def predicted(self):
        return np.argmax(self.logits, axis=1)

    @property
    def correct(self):
        return self.predicted == self.labels

    @property
    def errors(self):
        return (~self.correct).astype(int)

    def subset(self, index):
        return PredictionSet(self.logits[index], self.labels[index])


def save_predictions(preds, path):
    k = preds.n_classes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"y{j}" for j in range(k)] + ["label"])
        for row, label in zip(preds.logits, preds.labels):
            writer.writerow([format(v, ".17g") for v in row] + [int(label)])


def load_predictions(path):
    """Read a prediction CSV; the header row is optional."""
    logits, labels = [], []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and row[0].strip().lower() == "y0":
                width = len(row)
                continue
            if width is None:
                width = len(row)
            if len(row) != width or width < 2:
                raise ParseError(f"line {lineno}: expected {width} fields, got {len(row)}")
            try:
                values = [float(c) for c in row[:-1]]
                label_f = float(row[-1])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in values) or not math.isfinite(label_f):
                raise DataError(f"line {lineno}: non-finite value")
            if label_f != int(label_f) or label_f < 0:
                raise ParseError(f"line {lineno}: label must be a non-negative integer")
            logits.append(values)
            labels.append(int(label_f))
    if not logits:
        raise ParseError(f"{path}: no prediction rows")
    return PredictionSet(np.array(logits), np.array(labels))


def downsample(preds, target_n, seed=0):
    """Uniform sample without replacement, keeping survivors in original order."""
    n = len(preds)
    if int(target_n) != target_n or not 1 <= target_n <= n:
        raise InvalidParameterError(f"target size must be in [1, {n}], got {target_n!r}")
    if target_n == n:
        return preds.subset(np.arange(n))
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(n, size=int(target_n), replace=False))
    return preds.subset(keep)


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    is_test: np.ndarray
    seed: int
    generator: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        self.is_test = np.asarray(self.is_test, dtype=bool)
        if not np.all(np.isfinite(self.features)):
            raise DataError("features contain non-finite values")

    @property
    def n_classes(self):
        return int(self.labels.max()) + 1

    @property
    def X_train(self):
        return self.features[~self.is_test]

    @property
    def y_train(self):
        return self.labels[~self.is_test]

    @property
    def X_test(self):
        return self.features[self.is_test]

    @property
    def y_test(self):
        return self.labels[self.is_test]

    def to_dict(self):
        return {
            "format": "qipf-dataset",
            "version": 1,
            "generator": self.generator,
            "seed": self.seed,
            "params": self.params,
            "features": self.features.tolist(),
            "labels": self.labels.tolist(),
            "split": ["test" if t else "train" for t in self.is_test],
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != "qipf-dataset":
            raise ParseError("not a dataset document")
        return cls(
            features=np.array(data["features"], dtype=float),
            labels=np.array(data["labels"], dtype=int),
            is_test=np.array([s == "test" for s in data["split"]]),
            seed=data["seed"],
            generator=data["generator"],
            params=data.get("params", {}),
        )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from None
        return cls.from_dict(data)


def _split(n, test_fraction, rng):
    if not 0 < test_fraction < 1:
        raise InvalidParameterError(f"test fraction must be in (0, 1), got {test_fraction!r}")
    n_test = max(1, int(round(n * test_fraction)))
    is_test = np.zeros(n, dtype=bool)
    is_test[rng.permutation(n)[:n_test]] = True
    return is_test


def blob_centers(k, radius=1.0):
    angles = 2 * np.pi * np.arange(k) / k
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


def make_blobs(n=400, k=2, spread=0.3, seed=0, radius=1.0, test_fraction=0.3):
    """Isotropic Gaussian blobs with ``k`` centers evenly spaced on a circle."""
    if k < 2 or n < 2 * k:
        raise InvalidParameterError(f"need k >= 2 and n >= 2k, got n={n}, k={k}")
    if spread < 0:
        raise InvalidParameterError("spread must be non-negative")
    features, labels = _sk_blobs(n_samples=n, centers=blob_centers(k, radius), cluster_std=spread, random_state=seed)
    rng = np.random.default_rng(seed)
    return Dataset(
        features,
        labels,
        _split(n, test_fraction, rng),
        seed,
        "blobs",
        {"n": n, "k": k, "spread": spread, "radius": radius, "test_fraction": test_fraction},
    )


def make_moons(n=400, noise=0.1, seed=0, test_fraction=0.3):
    """Two interleaving half-moons."""
    if n < 4:
        raise InvalidParameterError(f"need n >= 4, got {n}")
    features, labels = _sk_moons(n_samples=n, noise=noise, random_state=seed)
    rng = np.random.default_rng(seed)
    return Dataset(
        features,
        labels,
        _split(n, test_fraction, rng),
        seed,
        "moons",
        {"n": n, "noise": noise, "test_fraction": test_fraction},
    )


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    severity: int

    def __post_init__(self):
        if self.kind not in SEVERITY_TABLES:
            raise InvalidParameterError(f"unknown corruption {self.kind!r}; choose from {CORRUPTION_KINDS}")
        table = SEVERITY_TABLES[self.kind]
        if int(self.severity) != self.severity or not 0 <= self.severity < len(table):
            raise InvalidParameterError(f"severity must be in 0..{len(table) - 1}, got {self.severity!r}")

    @property
    def parameter(self):
        return SEVERITY_TABLES[self.kind][self.severity]


def apply_corruption(features, kind, parameter):
    """Apply one affine corruption with an explicit parameter value."""
    x = np.array(features, dtype=float)
    if kind in ("rotation", "shear"):
        if x.ndim != 2 or x.shape[1] < 2:
            raise ShapeError(f"{kind} needs at least two feature columns")
        a, b = x[:, 0].copy(), x[:, 1].copy()
        if kind == "rotation":
            t = math.radians(parameter)
            c, s = math.cos(t), math.sin(t)
            x[:, 0] = c * a - s * b
            x[:, 1] = s * a + c * b
        else:
            x[:, 0] = a + parameter * b
    elif kind == "zoom":
        x = x * parameter
    elif kind == "brightness":
        x = x + parameter
    else:
        raise InvalidParameterError(f"unknown corruption {kind!r}; choose from {CORRUPTION_KINDS}")
    return x


def corrupt(features, spec):
    """Corrupt features per ``spec``; severity 0 returns an exact copy."""
    if spec.severity == 0:
        return np.array(features, dtype=float)
    return apply_corruption(features, spec.kind, spec.parameter)
