"""Least-squares gradient boosting on regression trees, with gain importances.

A deliberately plain booster: each round fits a depth-limited tree to the
current residuals using exact greedy splits, and the squared-error reduction
of every split is credited to its feature.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateDataWarning, WidthMismatch

_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class GbdtConfig:
    n_trees: int = 200
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 2
    subsample: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must lie in (0, 1]")


@dataclass
class RegressionTree:
    """Flat array tree; ``feature == -1`` marks a leaf.  Rows go left when
    ``x[feature] <= threshold``."""

    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    value: list = field(default_factory=list)

    def _add(self, value) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.feature) - 1

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        node = np.zeros(len(x), dtype=int)
        feature = np.array(self.feature)
        threshold = np.array(self.threshold)
        left, right = np.array(self.left), np.array(self.right)
        active = feature[node] >= 0
        while np.any(active):
            rows = np.nonzero(active)[0]
            f = feature[node[rows]]
            go_left = x[rows, f] <= threshold[node[rows]]
            node[rows] = np.where(go_left, left[node[rows]], right[node[rows]])
            active = feature[node] >= 0
        return np.array(self.value)[node]

    def to_dict(self) -> dict:
        return asdict(self)


def best_split(x: np.ndarray, r: np.ndarray, min_leaf: int):
    """Exact greedy split maximising the squared-error reduction.

    Returns ``(gain, feature, threshold)``; ``feature`` is None when no
    admissible split exists.  Ties go to the lowest feature index, then the
    lowest threshold.
    """
    n, n_feat = x.shape
    total = r.sum()
    parent = total * total / n
    best = (0.0, None, None)
    if n < 2 * min_leaf:
        return best
    counts = np.arange(1, n)
    ok_count = (counts >= min_leaf) & (n - counts >= min_leaf)
    for f in range(n_feat):
        order = np.argsort(x[:, f], kind="stable")
        xs, rs = x[order, f], r[order]
        left_sum = np.cumsum(rs)[:-1]
        right_sum = total - left_sum
        gain = left_sum**2 / counts + right_sum**2 / (n - counts) - parent
        valid = ok_count & (xs[1:] > xs[:-1])
        if not np.any(valid):
            continue
        gain = np.where(valid, gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best[0] + _MIN_GAIN:
            best = (float(gain[k]), f, 0.5 * (xs[k] + xs[k + 1]))
    return best


def _grow(tree, x, r, rows, depth, cfg, importances) -> int:
    node = tree._add(r[rows].mean())
    if depth >= cfg.max_depth:
        return node
    gain, f, thr = best_split(x[rows], r[rows], cfg.min_samples_leaf)
    if f is None or gain <= _MIN_GAIN:
        return node
    importances[f] += gain
    go_left = x[rows, f] <= thr
    tree.feature[node] = f
    tree.threshold[node] = float(thr)
    tree.left[node] = _grow(tree, x, r, rows[go_left], depth + 1, cfg, importances)
    tree.right[node] = _grow(tree, x, r, rows[~go_left], depth + 1, cfg, importances)
    return node


@dataclass
class GbdtModel:
    base_prediction: float
    trees: list
    importances: np.ndarray
    learning_rate: float
    n_features: int

    def predict(self, rows) -> np.ndarray:
        x = np.atleast_2d(np.asarray(rows, dtype=float))
        if x.shape[1] != self.n_features:
            raise WidthMismatch(f"expected {self.n_features} columns, got {x.shape[1]}")
        out = np.full(len(x), self.base_prediction)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(x)
        return out

    def to_dict(self) -> dict:
        return {
            "base_prediction": self.base_prediction,
            "learning_rate": self.learning_rate,
            "n_features": self.n_features,
            "importances": self.importances.tolist(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GbdtModel":
        return cls(
            base_prediction=float(doc["base_prediction"]),
            trees=[RegressionTree(**t) for t in doc["trees"]],
            importances=np.array(doc["importances"], dtype=float),
            learning_rate=float(doc["learning_rate"]),
            n_features=int(doc["n_features"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "GbdtModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def fit(rows, targets, cfg: GbdtConfig | None = None) -> GbdtModel:
    cfg = cfg or GbdtConfig()
    x = np.asarray(rows, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("rows must be (N, d) with one target per row")
    if len(x) < 2 * cfg.min_samples_leaf:
        raise ValueError(f"need at least {2 * cfg.min_samples_leaf} rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("rows and targets must be finite")

    base = float(y.mean())
    importances = np.zeros(x.shape[1])
    model = GbdtModel(base, [], importances, cfg.learning_rate, x.shape[1])
    if np.all(y == y[0]):
        warnings.warn("constant targets; returning a constant model", DegenerateDataWarning)
        return model

    rng = np.random.default_rng(cfg.seed)
    n_sample = max(2 * cfg.min_samples_leaf, int(round(cfg.subsample * len(x))))
    pred = np.full(len(x), base)
    for _ in range(cfg.n_trees):
        resid = y - pred
        if cfg.subsample < 1.0:
            rows_used = np.sort(rng.choice(len(x), size=min(n_sample, len(x)), replace=False))
        else:
            rows_used = np.arange(len(x))
        tree = RegressionTree()
        _grow(tree, x, resid, rows_used, 0, cfg, importances)
        model.trees.append(tree)
        pred += cfg.learning_rate * tree.predict(x)
    return model


def predict(model: GbdtModel, row) -> float | np.ndarray:
    out = model.predict(row)
    return float(out[0]) if np.ndim(row) == 1 else out


def feature_importances(model: GbdtModel, names) -> list[tuple[str, float]]:
    """Gain shares, largest first; ties keep column order.  All zeros when
    no split ever reduced the error."""
    gains = np.asarray(model.importances, dtype=float)
    if len(names) != len(gains):
        raise WidthMismatch("one name per feature required")
    total = gains.sum()
    shares = gains / total if total > 0 else np.zeros_like(gains)
    order = sorted(range(len(gains)), key=lambda i: (-shares[i], i))
    return [(names[i], float(shares[i])) for i in order]
