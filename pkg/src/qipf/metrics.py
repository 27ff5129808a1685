"""Error-detection metrics relating uncertainty scores to prediction errors.

``errors`` is always a 0/1 vector where 1 marks a wrong prediction; a good
uncertainty score is larger on errors.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

from .exceptions import InvalidParameterError, ShapeError, UndefinedMetricError


def _prepare(scores, errors):
    s = np.asarray(scores, dtype=float).ravel()
    e = np.asarray(errors).ravel()
    if s.shape != e.shape:
        raise ShapeError(f"scores ({s.size}) and errors ({e.size}) differ in length")
    if s.size == 0:
        raise UndefinedMetricError("no samples")
    if not np.all(np.isin(e, (0, 1))):
        raise InvalidParameterError("errors must be 0/1 flags")
    return s, e.astype(int)


def roc_auc(scores, errors):
    """Area under the ROC curve via the Mann-Whitney rank statistic.

    Ties between an error and a correct prediction earn half credit.
    """
    s, e = _prepare(scores, errors)
    n_pos = int(e.sum())
    n_neg = e.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC-AUC needs both correct and wrong predictions")
    ranks = rankdata(s)  # average ranks: ties contribute 1/2
    u = ranks[e == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _sweep(s, e):
    # cumulative TP/FP at each distinct threshold, descending
    order = np.argsort(-s, kind="mergesort")
    s, e = s[order], e[order]
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp = np.cumsum(e)[last]
    fp = (last + 1) - tp
    return s[last], tp, fp


def pr_auc(scores, errors):
    """Average precision ``sum_j (R_j - R_{j-1}) P_j``; tied scores form one block."""
    s, e = _prepare(scores, errors)
    n_pos = int(e.sum())
    if n_pos == 0:
        raise UndefinedMetricError("PR-AUC needs at least one wrong prediction")
    _, tp, fp = _sweep(s, e)
    precision = tp / (tp + fp)
    recall = tp / n_pos
    steps = np.diff(np.r_[0.0, recall])
    return float(np.sum(steps * precision))


def point_biserial(scores, errors):
    """Point-biserial correlation ``(M1 - M0) / s_n * sqrt(p q)``."""
    s, e = _prepare(scores, errors)
    n_pos = int(e.sum())
    if n_pos == 0 or n_pos == e.size:
        raise UndefinedMetricError("point-biserial correlation needs both classes")
    sd = s.std()
    if not sd > 0:
        raise UndefinedMetricError("scores have zero variance")
    p = n_pos / e.size
    m1 = s[e == 1].mean()
    m0 = s[e == 0].mean()
    return float((m1 - m0) / sd * math.sqrt(p * (1.0 - p)))


def roc_curve(scores, errors):
    """ROC points ``(fpr, tpr)`` from (0, 0) to (1, 1)."""
    s, e = _prepare(scores, errors)
    n_pos = int(e.sum())
    n_neg = e.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC curve needs both classes")
    _, tp, fp = _sweep(s, e)
    return np.r_[0.0, fp / n_neg], np.r_[0.0, tp / n_pos]


def pr_curve(scores, errors):
    """Precision-recall points ``(recall, precision)`` at each distinct threshold."""
    s, e = _prepare(scores, errors)
    n_pos = int(e.sum())
    if n_pos == 0:
        raise UndefinedMetricError("PR curve needs at least one wrong prediction")
    _, tp, fp = _sweep(s, e)
    return tp / n_pos, tp / (tp + fp)


def histogram(scores, errors, bins=20):
    """Per-class counts over shared bin edges spanning all scores.

    Returns ``(edges, correct_counts, wrong_counts)``; bins are right-open
    except the last.
    """
    s, e = _prepare(scores, errors)
    if int(bins) != bins or bins < 1:
        raise InvalidParameterError(f"bins must be a positive integer, got {bins!r}")
    edges = np.histogram_bin_edges(s, bins=int(bins))
    correct, _ = np.histogram(s[e == 0], bins=edges)
    wrong, _ = np.histogram(s[e == 1], bins=edges)
    return edges, correct, wrong


def _nan_to_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _nan_to_none(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_nan_to_none(v) for v in value]
    return value


@dataclass
class EvalReport:
    roc_auc: float
    pr_auc: float
    point_biserial: float
    roc_points: list = field(default_factory=list)
    pr_points: list = field(default_factory=list)
    histogram: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return _nan_to_none(asdict(self))

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        for key in ("roc_auc", "pr_auc", "point_biserial"):
            if data.get(key) is None:
                data[key] = float("nan")
        return cls(**data)

    def write_curves(self, roc_path, pr_path):
        with open(roc_path, "w") as fh:
            fh.write("fpr,tpr\n")
            for x, y in self.roc_points:
                fh.write(f"{x!r},{y!r}\n")
        with open(pr_path, "w") as fh:
            fh.write("recall,precision\n")
            for x, y in self.pr_points:
                fh.write(f"{x!r},{y!r}\n")


def _safe(fn, scores, errors):
    try:
        return fn(scores, errors)
    except UndefinedMetricError:
        return float("nan")


def evaluate(scores, errors, bins=20, **metadata):
    """Build an :class:`EvalReport`; metrics undefined for the sample become NaN."""
    s, e = _prepare(scores, errors)
    roc_pts, pr_pts = [], []
    if 0 < e.sum() < e.size:
        roc_pts = [[float(a), float(b)] for a, b in zip(*roc_curve(s, e))]
    if e.sum() > 0:
        pr_pts = [[float(a), float(b)] for a, b in zip(*pr_curve(s, e))]
    edges, correct, wrong = histogram(s, e, bins)
    metadata.setdefault("n", int(e.size))
    metadata.setdefault("n_errors", int(e.sum()))
    return EvalReport(
        roc_auc=_safe(roc_auc, s, e),
        pr_auc=_safe(pr_auc, s, e),
        point_biserial=_safe(point_biserial, s, e),
        roc_points=roc_pts,
        pr_points=pr_pts,
        histogram={
            "edges": [float(x) for x in edges],
            "correct": [int(x) for x in correct],
            "wrong": [int(x) for x in wrong],
        },
        metadata=metadata,
    )
