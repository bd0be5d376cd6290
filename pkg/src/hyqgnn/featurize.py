"""Crystal-graph featurization of ABO3 perovskites.

Each structure becomes a complete graph on its five sites.  Nodes carry seven
chemical descriptors; edges carry four pairwise descriptors.  The graphs can
also be flattened into fixed-width tabular rows for tree models.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import (
    SITE_LABELS,
    CrystalStructure,
    canonical_perovskite,
    lookup_element_properties,
    min_image_distance,
)
from .errors import DegenerateGeometry, InvalidComposition, ParseError, SchemaError
from .ewald import EwaldConfig, ewald_site_energies

NODE_FEATURES = (
    "atomic_number",
    "ewald_energy",
    "electronegativity",
    "electron_affinity",
    "first_ionization",
    "cationic_radius",
    "anionic_radius",
)
EDGE_FEATURES = (
    "inverse_distance",
    "coulomb",
    "delta_electronegativity",
    "delta_electron_affinity",
)
N_NODES = 5
ALL_PAIRS = tuple(itertools.combinations(range(N_NODES), 2))


@dataclass(frozen=True)
class FeaturizedGraph:
    """Five-node crystal graph.

    ``edge_index[k] = (i, j)`` with ``i < j`` labels row ``k`` of
    ``edge_features``.
    """

    node_features: np.ndarray
    edge_index: np.ndarray
    edge_features: np.ndarray
    target: float | None = None
    name: str = ""
    labels: tuple = field(default=SITE_LABELS)

    def __post_init__(self):
        nodes = np.array(self.node_features, dtype=float)
        idx = np.array(self.edge_index, dtype=int).reshape(-1, 2)
        feats = np.array(self.edge_features, dtype=float).reshape(-1, len(EDGE_FEATURES))
        if nodes.shape != (N_NODES, len(NODE_FEATURES)):
            raise SchemaError(f"node_features must be 5x7, got {nodes.shape}")
        if len(idx) != len(feats):
            raise SchemaError("edge_index and edge_features lengths differ")
        pairs = [tuple(p) for p in idx.tolist()]
        if any(not (0 <= i < j < N_NODES) for i, j in pairs):
            raise SchemaError("edges must satisfy 0 <= i < j < 5")
        if len(set(pairs)) != len(pairs):
            raise SchemaError("duplicate edge")
        if len(feats) and np.any(feats[:, 0] <= 0):
            raise SchemaError("inverse-distance feature must be positive")
        for arr in (nodes, idx, feats):
            arr.setflags(write=False)
        object.__setattr__(self, "node_features", nodes)
        object.__setattr__(self, "edge_index", idx)
        object.__setattr__(self, "edge_features", feats)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def edges(self) -> list[tuple[int, int, np.ndarray]]:
        return [(int(i), int(j), f) for (i, j), f in zip(self.edge_index, self.edge_features)]


def coulomb_offdiagonal(z_i: float, z_j: float, d: float) -> float:
    """Off-diagonal Coulomb-matrix element Z_i Z_j / d."""
    if not d > 0:
        raise DegenerateGeometry(f"non-positive distance {d}")
    return z_i * z_j / d


def _formula(structure: CrystalStructure) -> str:
    a, b = structure.species[:2]
    return f"{a}{b}O3"


def build_graph(structure: CrystalStructure, cfg: EwaldConfig | None = None,
                cutoff: float | None = None, name: str | None = None) -> FeaturizedGraph:
    """Featurize an ABO3 structure into a :class:`FeaturizedGraph`.

    Sites are reordered to (A, B, O, O, O) first.  With ``cutoff`` set, pairs
    farther apart than ``cutoff`` Angstrom are dropped from the edge list.
    """
    s = canonical_perovskite(structure)
    props = [lookup_element_properties(el) for el in s.species]
    ewald = ewald_site_energies(s, cfg)

    rows = []
    for p, e in zip(props, ewald):
        row = p.as_node_row()
        rows.append([row[0], float(e), *row[1:]])
    nodes = np.array(rows)
    if not np.all(np.isfinite(nodes)):
        raise InvalidComposition(f"incomplete element data for {_formula(s)}")

    frac = s.frac_coords
    index, feats = [], []
    for i, j in ALL_PAIRS:
        d = min_image_distance(s.lattice, frac[i], frac[j])
        if d <= 0:
            raise DegenerateGeometry(f"sites {i} and {j} coincide")
        if cutoff is not None and d > cutoff:
            continue
        pi, pj = props[i], props[j]
        index.append((i, j))
        feats.append([
            1.0 / d,
            coulomb_offdiagonal(pi.atomic_number, pj.atomic_number, d),
            abs(pi.electronegativity - pj.electronegativity),
            abs(pi.electron_affinity - pj.electron_affinity),
        ])
    return FeaturizedGraph(
        node_features=nodes,
        edge_index=np.array(index, dtype=int).reshape(-1, 2),
        edge_features=np.array(feats).reshape(-1, len(EDGE_FEATURES)),
        target=s.target_energy,
        name=name or _formula(s),
    )


def featurize_structures(structures: Sequence[CrystalStructure], cfg: EwaldConfig | None = None,
                         cutoff: float | None = None, threads: int | None = None) -> list[FeaturizedGraph]:
    threads = threads or int(os.environ.get("HYQGNN_THREADS", "1"))
    work = lambda s: build_graph(s, cfg, cutoff)  # noqa: E731
    if threads <= 1:
        return [work(s) for s in structures]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, structures))


# -- tabular view -------------------------------------------------------------

def flat_column_names(labels: Sequence[str] = SITE_LABELS) -> list[str]:
    names = [f"{f}({lab})" for lab in labels for f in NODE_FEATURES]
    for i, j in ALL_PAIRS:
        names += [f"{f}({labels[i]}-{labels[j]})" for f in EDGE_FEATURES]
    return names


def flatten_graph(g: FeaturizedGraph) -> tuple[np.ndarray, list[str]]:
    """Node-major node features, then edge features in (i, j) order.

    Edges pruned by a distance cutoff contribute zeros.
    """
    edge_block = np.zeros((len(ALL_PAIRS), len(EDGE_FEATURES)))
    slot = {pair: k for k, pair in enumerate(ALL_PAIRS)}
    for (i, j), f in zip(g.edge_index.tolist(), g.edge_features):
        edge_block[slot[(i, j)]] = f
    row = np.concatenate([g.node_features.reshape(-1), edge_block.reshape(-1)])
    return row, flat_column_names(g.labels)


def graphs_to_table(graphs: Sequence[FeaturizedGraph]) -> tuple[np.ndarray, np.ndarray, list[str]]:
    rows = [flatten_graph(g)[0] for g in graphs]
    x = np.array(rows).reshape(len(rows), -1)
    y = np.array([np.nan if g.target is None else g.target for g in graphs])
    return x, y, flat_column_names()


# -- persistence ---------------------------------------------------------------

def graph_to_dict(g: FeaturizedGraph) -> dict:
    doc = {
        "name": g.name,
        "labels": list(g.labels),
        "node_features": g.node_features.tolist(),
        "edges": [[i, j, f.tolist()] for i, j, f in g.edges],
    }
    if g.target is not None:
        doc["target_ev"] = g.target
    return doc


def graph_from_dict(doc: dict, index: int, require_target: bool = True) -> FeaturizedGraph:
    if not isinstance(doc, dict):
        raise SchemaError(f"record {index}: expected an object")
    for key in ("node_features", "edges"):
        if key not in doc:
            raise SchemaError(f"record {index}: missing '{key}'")
    if require_target and doc.get("target_ev") is None:
        raise SchemaError(f"record {index}: missing 'target_ev'")
    try:
        edges = doc["edges"]
        return FeaturizedGraph(
            node_features=doc["node_features"],
            edge_index=[(e[0], e[1]) for e in edges],
            edge_features=[e[2] for e in edges],
            target=None if doc.get("target_ev") is None else float(doc["target_ev"]),
            name=str(doc.get("name", "")),
            labels=tuple(doc.get("labels", SITE_LABELS)),
        )
    except SchemaError as exc:
        raise SchemaError(f"record {index}: {exc}") from exc
    except (TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"record {index}: {exc}") from exc


def save_graphs_json(graphs: Iterable[FeaturizedGraph], path) -> None:
    docs = [graph_to_dict(g) for g in graphs]
    Path(path).write_text(json.dumps(docs, indent=1) + "\n")


def load_graphs_json(path, require_target: bool = True) -> list[FeaturizedGraph]:
    text = Path(path).read_text()
    if not text.strip():
        return []
    try:
        docs = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(docs, list):
        raise SchemaError(f"{path}: expected a list of graph records")
    return [graph_from_dict(d, i, require_target) for i, d in enumerate(docs)]


def save_table_csv(graphs: Sequence[FeaturizedGraph], path) -> None:
    x, y, names = graphs_to_table(graphs)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*names, "target_ev"])
        for row, t in zip(x, y):
            w.writerow([repr(float(v)) for v in row] + ["" if np.isnan(t) else repr(float(t))])


def load_table_csv(path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = [r for r in reader if r]
    names = header[:-1]
    x = np.array([[float(v) for v in r[:-1]] for r in body]).reshape(len(body), len(names))
    y = np.array([float(r[-1]) if r[-1] else np.nan for r in body])
    return x, y, names
