"""Flat-parameter hybrid and classical models over a :class:`GraphBatch`.

Both models share the GENConv front end that reduces each graph to a 5x5
symmetric weight matrix.  The hybrid model feeds that matrix through the
amplitude-encoded circuit; the classical model applies an affine readout to
its 25 entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LayoutMismatch
from ..gnn import N_EDGE_IN, N_NODE_IN, GenConvParams, GraphBatch, genconv_batch, weight_matrices
from ..quantum import N_QUBITS, QuantumParams, circuit_predict

HYBRID = "hybrid"
CLASSICAL = "classical"
GBDT = "gbdt"
MODELS = (HYBRID, CLASSICAL, GBDT)
_N_ENTRIES = 25


@dataclass(frozen=True)
class FeatureScaler:
    """Per-column z-scoring of node and edge features from training graphs.

    Columns with zero spread are only centred.
    """

    node_mean: np.ndarray
    node_std: np.ndarray
    edge_mean: np.ndarray
    edge_std: np.ndarray

    @classmethod
    def fit(cls, batch: GraphBatch) -> "FeatureScaler":
        nodes = batch.nodes.reshape(-1, batch.nodes.shape[-1])
        edges = batch.edges.reshape(-1, batch.edges.shape[-1])

        def stats(x):
            mu = np.nanmean(x, axis=0)
            sd = np.nanstd(x, axis=0)
            return np.nan_to_num(mu), np.where(sd > 0, sd, 1.0)

        nm, ns = stats(nodes)
        em, es = stats(edges)
        return cls(nm, ns, em, es)

    def transform(self, batch: GraphBatch) -> GraphBatch:
        # missing descriptors (noble gases) sit at the training mean
        nodes = np.nan_to_num((batch.nodes - self.node_mean) / self.node_std)
        edges = np.nan_to_num((batch.edges - self.edge_mean) / self.edge_std)
        return GraphBatch(nodes, batch.edge_index, edges)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("node_mean", "node_std", "edge_mean", "edge_std")}

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureScaler":
        return cls(*(np.asarray(doc[k], dtype=float)
                     for k in ("node_mean", "node_std", "edge_mean", "edge_std")))


def _fan_in(name: str, hidden: int) -> int:
    """Input width of a dense block, 1 for everything else."""
    return {
        "edge_encoder.weight": N_EDGE_IN,
        "node_encoder.weight": N_NODE_IN,
        "update.weight": hidden,
        "node_head.weight": hidden,
        "edge_head.weight": N_EDGE_IN,
        "readout.weight": _N_ENTRIES,
    }.get(name.split(".", 1)[1] if name.startswith("gnn.") else name, 1)


class FlatModel:
    """A model whose parameters are one flat vector: GENConv block first.

    The optimizer searches a unit-scale space; every dense weight block is
    multiplied by ``1/sqrt(fan_in)`` on the way into the network so that a
    standard-normal step keeps activations of order one.  ``effective``
    applies that map and ``layout`` names the optimizer-space blocks.
    """

    kind = ""

    def __init__(self, hidden: int = 8, layers: int = 2):
        self.hidden = int(hidden)
        self.layers = int(layers)
        self.n_gnn = GenConvParams.size(self.hidden)
        self._scale = self.param_scale()

    @property
    def size(self) -> int:
        return self.n_gnn + self.head_size()

    def head_size(self) -> int:
        raise NotImplementedError

    def head_layout(self) -> list[tuple[str, int, int]]:
        raise NotImplementedError

    def layout(self) -> list[tuple[str, int, int]]:
        out = [(f"gnn.{name}", off, n) for name, off, n in GenConvParams.layout(self.hidden)]
        out += [(name, self.n_gnn + off, n) for name, off, n in self.head_layout()]
        return out

    def param_scale(self) -> np.ndarray:
        out = np.ones(self.size)
        for name, off, n in self.layout():
            out[off:off + n] = 1.0 / np.sqrt(_fan_in(name, self.hidden))
        return out

    def effective(self, vec) -> np.ndarray:
        """Network parameters for an optimizer-space vector."""
        vec = np.asarray(vec, dtype=float)
        if vec.ndim != 1 or vec.size != self.size:
            raise LayoutMismatch(f"{self.kind} model expects {self.size} parameters, got {vec.size}")
        return vec * self._scale

    def _split(self, vec):
        vec = self.effective(vec)
        return GenConvParams.from_flat(vec[: self.n_gnn], self.hidden), vec[self.n_gnn:]

    def weight_matrices(self, vec, batch: GraphBatch) -> np.ndarray:
        gp, _ = self._split(vec)
        nodes, edges = genconv_batch(batch, gp)
        return weight_matrices(nodes, batch.edge_index, edges)

    def predict(self, vec, batch: GraphBatch) -> np.ndarray:
        raise NotImplementedError


class HybridModel(FlatModel):
    kind = HYBRID

    def head_size(self) -> int:
        return QuantumParams.size(N_QUBITS, self.layers)

    def head_layout(self):
        return [(f"quantum.{name}", off, n) for name, off, n in QuantumParams.layout(N_QUBITS, self.layers)]

    def predict(self, vec, batch: GraphBatch) -> np.ndarray:
        gp, head = self._split(vec)
        qp = QuantumParams.from_flat(head, N_QUBITS, self.layers)
        nodes, edges = genconv_batch(batch, gp)
        return np.atleast_1d(circuit_predict(weight_matrices(nodes, batch.edge_index, edges), qp))


class ClassicalModel(FlatModel):
    kind = CLASSICAL

    def head_size(self) -> int:
        return _N_ENTRIES + 1

    def head_layout(self):
        return [("readout.weight", 0, _N_ENTRIES), ("readout.bias", _N_ENTRIES, 1)]

    def predict(self, vec, batch: GraphBatch) -> np.ndarray:
        gp, head = self._split(vec)
        nodes, edges = genconv_batch(batch, gp)
        w = weight_matrices(nodes, batch.edge_index, edges).reshape(len(batch), _N_ENTRIES)
        return w @ head[:_N_ENTRIES] + head[_N_ENTRIES]


def build_model(kind: str, hidden: int = 8, layers: int = 2) -> FlatModel:
    if kind == HYBRID:
        return HybridModel(hidden, layers)
    if kind == CLASSICAL:
        return ClassicalModel(hidden, layers)
    raise ValueError(f"no flat-parameter model named {kind!r}")
