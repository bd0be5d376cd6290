"""Command-line entry point: ``hyqgnn <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import HyqgnnError

log = logging.getLogger("hyqgnn")

_RUN_KEYS = {
    "model": str, "budget": int, "seed": int, "hidden": int, "layers": int,
    "dataset": str, "output": str, "algorithm": str, "threads": int, "split": str,
}


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; quotes are stripped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "split_sizes":
            key = "split"
        if key not in _RUN_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        value = value.strip("\"'")
        out[key] = _RUN_KEYS[key](value) if _RUN_KEYS[key] is int else value
    return out


def _parse_split(text: str) -> tuple[int, int, int]:
    parts = [p for p in text.replace("/", ",").replace(" ", "").strip("()[]").split(",") if p]
    if len(parts) != 3:
        raise ValueError(f"split must have three counts, got {text!r}")
    return tuple(int(p) for p in parts)


def _run_config(args, model_default: str = "hybrid"):
    from .harness.training import RunConfig

    merged = read_config_file(args.config) if args.config else {}
    for key in _RUN_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    merged.setdefault("model", model_default)
    if "split" in merged:
        merged["split_sizes"] = _parse_split(merged.pop("split"))
    return RunConfig(**merged)


def _dataset(cfg):
    from .harness.data import load_dataset

    if cfg.dataset:
        return load_dataset(cfg.dataset)
    from .featurize import featurize_structures
    from .harness.synthetic import generate_structures

    log.info("no --dataset given; using the bundled synthetic set (n=246, seed=1)")
    return featurize_structures(generate_structures(246, 1))


# -- subcommands ------------------------------------------------------------------

def cmd_featurize(args) -> int:
    from .core import load_structures
    from .featurize import featurize_structures, save_graphs_json, save_table_csv

    graphs = featurize_structures(load_structures(args.structures), cutoff=args.cutoff,
                                  threads=args.threads)
    save_graphs_json(graphs, args.output)
    if args.csv:
        save_table_csv(graphs, args.csv)
    print(f"featurized {len(graphs)} structures -> {args.output}")
    return 0


def cmd_train(args) -> int:
    from .harness.training import save_run, train

    cfg = _run_config(args)
    if cfg.model == "gbdt":
        return cmd_baseline(args)
    data = _dataset(cfg)
    step = max(1, cfg.budget // 10)

    def progress(it, loss, val):
        if (it + 1) % step == 0:
            log.info("iteration %d: train %.4g, val %.4g", it + 1, loss, val)

    art = train(cfg, data, callback=progress)
    out = save_run(art, cfg, cfg.output or "runs/latest")
    print(f"{cfg.model}: best val MSE {art.best_val_loss:.4g} at iteration {art.best_index + 1}; "
          f"test R2 (fit) {art.r2:.3f}, R2 (identity) {art.r2_identity:.3f}")
    print(f"artifacts written to {out}")
    return 0


def cmd_baseline(args) -> int:
    from .baseline import GbdtConfig
    from .harness.training import fit_baseline

    cfg = _run_config(args, model_default="gbdt")
    gcfg = GbdtConfig(n_trees=getattr(args, "trees", None) or 200,
                      max_depth=getattr(args, "depth", None) or 3,
                      learning_rate=getattr(args, "learning_rate", None) or 0.1,
                      seed=cfg.seed)
    report = fit_baseline(cfg, _dataset(cfg), gcfg, cfg.output or "runs/baseline")
    print(json.dumps(report, indent=2))
    return 0


def cmd_importance(args) -> int:
    from .baseline import GbdtModel, feature_importances
    from .featurize import flat_column_names
    from .harness.plots import write_importance_report

    model = GbdtModel.load(args.model_file)
    if args.names:
        names = json.loads(Path(args.names).read_text())
    else:
        names = flat_column_names()
    ranking = feature_importances(model, names)
    for name, share in ranking[: args.top]:
        print(f"{share:8.4f}  {name}")
    if args.output:
        write_importance_report(ranking, args.output, args.svg, args.top)
    return 0


def cmd_evaluate(args) -> int:
    from .harness.data import load_dataset
    from .harness.metrics import evaluate_r2, r2_identity
    from .harness.plots import emit_parity_plot
    from .harness.training import load_checkpoint, predict_with_checkpoint

    graphs = load_dataset(args.dataset)
    pred = predict_with_checkpoint(load_checkpoint(args.checkpoint), graphs)
    true = [g.target for g in graphs]
    report = {"n": len(graphs), "r2_fit": evaluate_r2(true, pred), "r2_identity": r2_identity(true, pred)}
    if args.plot:
        emit_parity_plot(list(zip(true, pred.tolist())), args.plot)
    print(json.dumps(report, indent=2))
    return 0


def cmd_plot(args) -> int:
    from .harness.plots import emit_parity_plot, read_pairs_csv

    pairs = read_pairs_csv(args.pairs)
    svg, _ = emit_parity_plot(pairs, args.output, title=args.title)
    print(f"wrote {svg}")
    return 0


def cmd_gen_synthetic(args) -> int:
    from .core import save_structures
    from .featurize import featurize_structures, save_graphs_json, save_table_csv
    from .harness.synthetic import generate_structures

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    structures = generate_structures(args.n, args.seed)
    save_structures(structures, out / "structures.json")
    graphs = featurize_structures(structures)
    save_graphs_json(graphs, out / "graphs.json")
    save_table_csv(graphs, out / "graphs.csv")
    print(f"wrote {len(structures)} structures to {out}")
    return 0


# -- parser ---------------------------------------------------------------------------

def _add_run_flags(p, model_choices):
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--model", choices=model_choices)
    p.add_argument("--dataset", help="featurized graphs JSON (default: bundled synthetic set)")
    p.add_argument("--output", help="artifact directory")
    p.add_argument("--split", help="train,val,test counts (default 196,25,25)")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, help="optimizer evaluations (default 2000)")
    p.add_argument("--hidden", type=int, help="GENConv hidden width (default 8)")
    p.add_argument("--layers", type=int, help="ansatz layers (default 2)")
    p.add_argument("--algorithm", choices=["one-plus-one-es", "differential-evolution"])
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyqgnn", description="Hybrid quantum-classical GNN for perovskite formation energies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("featurize", help="structures JSON -> featurized graphs")
    p.add_argument("structures")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv", help="also write the flattened table")
    p.add_argument("--cutoff", type=float, help="drop edges longer than this (angstrom)")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train the hybrid or classical model")
    _add_run_flags(p, ["hybrid", "classical", "gbdt"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("baseline", help="fit and evaluate the gradient-boosted tree baseline")
    _add_run_flags(p, ["gbdt"])
    p.add_argument("--trees", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--learning-rate", type=float)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("importance", help="rank features of a saved tree model")
    p.add_argument("model_file")
    p.add_argument("--names", help="JSON list of column names (default: flattened graph columns)")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("-o", "--output", help="write the full ranking as CSV")
    p.add_argument("--svg", help="also write a bar chart")
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("evaluate", help="score a checkpoint on a featurized dataset")
    p.add_argument("checkpoint")
    p.add_argument("dataset")
    p.add_argument("--plot", help="write a parity SVG here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="parity plot from a (true, predicted) CSV")
    p.add_argument("pairs")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--title", default="parity")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("gen-synthetic", help="write the synthetic perovskite dataset")
    p.add_argument("--n", type=int, default=246)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("-o", "--output", default="synthetic")
    p.set_defaults(func=cmd_gen_synthetic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (HyqgnnError, ValueError, OSError) as exc:
        print(f"hyqgnn {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
