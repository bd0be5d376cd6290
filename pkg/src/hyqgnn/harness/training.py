"""The gradient-free training loop and run persistence."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConstantTarget, DegeneratePrediction, HyqgnnError
from ..gnn import GraphBatch, layout_manifest
from ..optimize import PENALTY, Optimizer
from ..quantum import N_QUBITS, QuantumParams, circuit_text
from .data import split_dataset
from .metrics import evaluate_r2, r2_identity
from .models import CLASSICAL, HYBRID, MODELS, FeatureScaler, build_model
from .plots import emit_parity_plot

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    model: str = HYBRID
    split_sizes: tuple = (196, 25, 25)
    budget: int = 2000
    seed: int = 7
    hidden: int = 8
    layers: int = 2
    dataset: str | None = None
    output: str | None = None
    algorithm: str | None = None
    threads: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "split_sizes", tuple(int(s) for s in self.split_sizes))
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if len(self.split_sizes) != 3 or any(s < 1 for s in self.split_sizes):
            raise ValueError("split sizes must be three positive counts")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.hidden < 1 or self.layers < 1:
            raise ValueError("hidden size and layer count must be >= 1")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["split_sizes"] = list(self.split_sizes)
        return doc


@dataclass
class RunArtifacts:
    model: str
    loss_history: list
    val_history: list
    best_params: np.ndarray
    best_index: int
    test_predictions: list  # (true_ev, predicted_ev)
    r2: float
    r2_identity: float
    target_mean: float
    target_std: float
    scaler: FeatureScaler
    effective_params: np.ndarray = field(default=None)

    @property
    def best_val_loss(self) -> float:
        return self.val_history[self.best_index]


def _threads(cfg: RunConfig) -> int:
    return int(cfg.threads or os.environ.get("HYQGNN_THREADS", "1"))


def _predict(model, vec, batch: GraphBatch, pool) -> np.ndarray:
    if pool is None:
        return model.predict(vec, batch)
    chunks = np.array_split(np.arange(len(batch)), pool._max_workers)
    parts = pool.map(lambda idx: model.predict(vec, batch.take(idx)), [c for c in chunks if len(c)])
    return np.concatenate(list(parts))


def _mse(model, vec, batch, target, pool) -> float:
    """Mean squared error, or the penalty when the model cannot evaluate."""
    try:
        pred = _predict(model, vec, batch, pool)
    except (HyqgnnError, ArithmeticError, ValueError):
        return PENALTY
    loss = float(np.mean((pred - target) ** 2))
    return loss if math.isfinite(loss) else PENALTY


def train(config: RunConfig, data, callback=None) -> RunArtifacts:
    """Fit a hybrid or classical model by ask/tell on the full training batch.

    Every candidate is scored on the training split (the loss the optimizer
    sees) and on the validation split; the candidate with the lowest
    validation loss (first one on ties) is kept and evaluated on the test
    split.
    """
    if config.model not in (HYBRID, CLASSICAL):
        raise ValueError("train() handles the hybrid and classical models; use fit_baseline for gbdt")
    train_set, val_set, test_set = split_dataset(data, config.split_sizes, config.seed)

    y_train = np.array([g.target for g in train_set], dtype=float)
    mu, sigma = float(y_train.mean()), float(y_train.std())
    if not sigma > 0.0:
        raise ConstantTarget("training targets have zero variance; cannot standardize")

    def targets(gs):
        return (np.array([g.target for g in gs], dtype=float) - mu) / sigma

    b_train, b_val, b_test = (GraphBatch.from_graphs(gs) for gs in (train_set, val_set, test_set))
    scaler = FeatureScaler.fit(b_train)
    b_train, b_val, b_test = (scaler.transform(b) for b in (b_train, b_val, b_test))
    z_train, z_val = targets(train_set), targets(val_set)

    model = build_model(config.model, config.hidden, config.layers)
    opt = Optimizer(model.size, config.budget, config.seed, config.algorithm)
    log.info("training %s model: %d parameters, %s, budget %d",
             config.model, model.size, opt.algorithm, config.budget)

    losses, vals = [], []
    best_vec, best_val, best_idx = None, math.inf, -1
    n_threads = _threads(config)
    pool = ThreadPoolExecutor(max_workers=n_threads) if n_threads > 1 else None
    try:
        for it in range(config.budget):
            x = opt.ask()
            loss = _mse(model, x, b_train, z_train, pool)
            opt.tell(x, loss)
            val = _mse(model, x, b_val, z_val, pool)
            losses.append(loss)
            vals.append(val)
            if val < best_val:
                best_vec, best_val, best_idx = x.copy(), val, it
            if callback is not None:
                callback(it, loss, val)
    finally:
        if pool is not None:
            pool.shutdown()

    try:
        pred_z = model.predict(best_vec, b_test)
    except (HyqgnnError, ArithmeticError, ValueError):
        pred_z = np.zeros(len(test_set))
    pred_ev = pred_z * sigma + mu
    true_ev = np.array([g.target for g in test_set], dtype=float)
    try:
        r2 = evaluate_r2(true_ev, pred_ev)
    except DegeneratePrediction:
        r2 = math.nan
    return RunArtifacts(
        model=config.model,
        loss_history=losses,
        val_history=vals,
        best_params=best_vec,
        best_index=best_idx,
        test_predictions=list(zip(true_ev.tolist(), pred_ev.tolist())),
        r2=r2,
        r2_identity=r2_identity(true_ev, pred_ev),
        target_mean=mu,
        target_std=sigma,
        scaler=scaler,
        effective_params=model.effective(best_vec),
    )


# -- persistence ----------------------------------------------------------------

def _write_history(path, history) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "candidate_loss", "best_loss"])
        best = math.inf
        for i, v in enumerate(history, 1):
            best = min(best, v)
            w.writerow([i, repr(float(v)), repr(float(best))])


def _json_number(v: float):
    return None if not math.isfinite(v) else v


def save_run(art: RunArtifacts, config: RunConfig, outdir) -> Path:
    """Write the run directory; returns its path."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    model = build_model(art.model, config.hidden, config.layers)

    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    _write_history(out / "loss.csv", art.loss_history)
    _write_history(out / "val.csv", art.val_history)
    checkpoint = {
        "model": art.model,
        "hidden": config.hidden,
        "layers": config.layers,
        "best_index": art.best_index,
        "best_val_loss": art.best_val_loss,
        "params": art.best_params.tolist(),
        "target_mean": art.target_mean,
        "target_std": art.target_std,
        "scaler": art.scaler.to_dict(),
    }
    (out / "checkpoint.json").write_text(json.dumps(checkpoint, indent=2) + "\n")
    (out / "checkpoint_manifest.txt").write_text(layout_manifest(model.layout()))
    emit_parity_plot(art.test_predictions, out / "parity.svg", title=f"{art.model} model, test split")
    report = {
        "model": art.model,
        "n_test": len(art.test_predictions),
        "r2_fit": _json_number(art.r2),
        "r2_identity": _json_number(art.r2_identity),
        "best_iteration": art.best_index + 1,
        "best_val_loss": art.best_val_loss,
        "initial_val_loss": art.val_history[0],
        "final_train_loss": min(art.loss_history),
        "evaluations": len(art.loss_history),
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    if art.model == HYBRID:
        head = art.effective_params[model.n_gnn:]
        (out / "circuit.txt").write_text(circuit_text(QuantumParams.from_flat(head, N_QUBITS, config.layers)))
    return out


def load_checkpoint(path) -> dict:
    doc = json.loads(Path(path).read_text())
    doc["params"] = np.asarray(doc["params"], dtype=float)
    doc["scaler"] = FeatureScaler.from_dict(doc["scaler"])
    return doc


def predict_with_checkpoint(checkpoint: dict, graphs) -> np.ndarray:
    """Predictions in eV for ``graphs`` from a loaded checkpoint."""
    model = build_model(checkpoint["model"], checkpoint["hidden"], checkpoint["layers"])
    batch = checkpoint["scaler"].transform(GraphBatch.from_graphs(list(graphs)))
    pred_z = model.predict(checkpoint["params"], batch)
    return pred_z * checkpoint["target_std"] + checkpoint["target_mean"]


# -- gradient-boosted baseline -----------------------------------------------------

def fit_baseline(config: RunConfig, data, gbdt_cfg=None, outdir=None) -> dict:
    """Fit the tree baseline on the tabular view of the same split.

    Returns a report dict; when ``outdir`` is given the model, importance
    ranking and parity plot are written there too.
    """
    from ..baseline import GbdtConfig, feature_importances, fit
    from ..featurize import graphs_to_table
    from .plots import write_importance_report

    train_set, _, test_set = split_dataset(data, config.split_sizes, config.seed)
    x_train, y_train, names = graphs_to_table(train_set)
    x_test, y_test, _ = graphs_to_table(test_set)
    model = fit(x_train, y_train, gbdt_cfg or GbdtConfig(seed=config.seed))
    pred = model.predict(x_test)
    try:
        r2 = evaluate_r2(y_test, pred)
    except DegeneratePrediction:
        r2 = math.nan
    ranking = feature_importances(model, names)
    report = {
        "model": "gbdt",
        "n_train": len(train_set),
        "n_test": len(test_set),
        "trees": len(model.trees),
        "r2_fit": _json_number(r2),
        "r2_identity": _json_number(r2_identity(y_test, pred)),
        "top_features": [[n, s] for n, s in ranking[:10]],
    }
    if outdir is not None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
        model.save(out / "gbdt_model.json")
        (out / "feature_names.json").write_text(json.dumps(names) + "\n")
        write_importance_report(ranking, out / "importance.csv", out / "importance.svg")
        emit_parity_plot(list(zip(y_test.tolist(), pred.tolist())), out / "parity.svg", title="gbdt, test split")
        (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report
