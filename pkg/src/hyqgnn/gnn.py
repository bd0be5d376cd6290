"""Forward-only GENConv layer reducing a crystal graph to scalar node/edge weights.

One message-passing step with softmax aggregation (learnable inverse
temperature ``beta``) and message normalisation (learnable scale ``s``),
followed by linear heads that distil one scalar per node and per edge.
All parameters live in a single flat vector so that a black-box optimizer
can drive them; see :meth:`GenConvParams.layout`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyNeighborhood, LayoutMismatch
from .featurize import EDGE_FEATURES, N_NODES, NODE_FEATURES, FeaturizedGraph

N_NODE_IN = len(NODE_FEATURES)
N_EDGE_IN = len(EDGE_FEATURES)
DEFAULT_HIDDEN = 8
DEFAULT_EPS = 1e-7
_NORM_GUARD = 1e-12


def _blocks(hidden: int) -> list[tuple[str, tuple[int, ...]]]:
    h = hidden
    return [
        ("edge_encoder.weight", (N_EDGE_IN, h)),
        ("edge_encoder.bias", (h,)),
        ("node_encoder.weight", (N_NODE_IN, h)),
        ("node_encoder.bias", (h,)),
        ("beta", ()),
        ("s", ()),
        ("update.weight", (h, h)),
        ("update.bias", (h,)),
        ("node_head.weight", (h,)),
        ("node_head.bias", ()),
        ("edge_head.weight", (N_EDGE_IN,)),
        ("edge_head.bias", ()),
    ]


@dataclass(frozen=True)
class GenConvParams:
    """Trainable GENConv parameters, keyed by block name.

    Dense weights are stored ``(in, out)`` so a layer is ``x @ W + b``.
    """

    hidden: int
    blocks: dict

    @staticmethod
    def layout(hidden: int = DEFAULT_HIDDEN) -> list[tuple[str, int, int]]:
        """(name, offset, length) for every block of the flat vector."""
        out, offset = [], 0
        for name, shape in _blocks(hidden):
            n = int(np.prod(shape)) if shape else 1
            out.append((name, offset, n))
            offset += n
        return out

    @staticmethod
    def size(hidden: int = DEFAULT_HIDDEN) -> int:
        name, offset, n = GenConvParams.layout(hidden)[-1]
        return offset + n

    @classmethod
    def from_flat(cls, vec, hidden: int = DEFAULT_HIDDEN) -> "GenConvParams":
        vec = np.asarray(vec, dtype=float)
        if vec.ndim != 1 or vec.size != cls.size(hidden):
            raise LayoutMismatch(
                f"expected {cls.size(hidden)} GENConv parameters for hidden={hidden}, got {vec.size}"
            )
        blocks = {}
        for (name, shape), (_, offset, n) in zip(_blocks(hidden), cls.layout(hidden)):
            chunk = vec[offset:offset + n]
            blocks[name] = float(chunk[0]) if shape == () else chunk.reshape(shape).copy()
        return cls(hidden, blocks)

    @classmethod
    def zeros(cls, hidden: int = DEFAULT_HIDDEN) -> "GenConvParams":
        return cls.from_flat(np.zeros(cls.size(hidden)), hidden)

    @classmethod
    def random(cls, rng: np.random.Generator, hidden: int = DEFAULT_HIDDEN, scale: float = 1.0):
        return cls.from_flat(scale * rng.standard_normal(cls.size(hidden)), hidden)

    def to_flat(self) -> np.ndarray:
        parts = [np.atleast_1d(np.asarray(self.blocks[name], dtype=float)).reshape(-1)
                 for name, _ in _blocks(self.hidden)]
        return np.concatenate(parts)

    def __getitem__(self, name):
        return self.blocks[name]


def layout_manifest(layout: list[tuple[str, int, int]]) -> str:
    lines = ["# name offset length"]
    lines += [f"{name} {offset} {n}" for name, offset, n in layout]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class IntermediateGraph:
    node_scalars: np.ndarray
    edge_scalars: dict

    def __post_init__(self):
        nodes = np.asarray(self.node_scalars, dtype=float)
        if nodes.shape != (N_NODES,):
            raise ValueError("intermediate graph needs exactly 5 node scalars")
        object.__setattr__(self, "node_scalars", nodes)


# -- the four building blocks ---------------------------------------------------

def message(h_u, e_uv, eps: float = DEFAULT_EPS) -> np.ndarray:
    return np.maximum(np.asarray(h_u) + np.asarray(e_uv), 0.0) + eps


def softmax_aggregate(messages, beta: float) -> np.ndarray:
    """Softmax-weighted sum over neighbours, independently per coordinate.

    ``beta = 0`` gives the mean; large ``beta`` approaches the max.
    """
    m = np.asarray(messages, dtype=float)
    if m.size == 0 or len(m) == 0:
        raise EmptyNeighborhood("softmax aggregation over an empty neighbourhood")
    if m.ndim == 1:
        m = m[:, None]
        squeeze = True
    else:
        squeeze = False
    z = beta * m
    w = np.exp(z - z.max(axis=0, keepdims=True))
    w /= w.sum(axis=0, keepdims=True)
    out = np.sum(w * m, axis=0)
    return out[0] if squeeze else out


def dense_relu(x, weight, bias) -> np.ndarray:
    return np.maximum(np.asarray(x) @ weight + bias, 0.0)


def message_norm_update(h_v, m_v, s: float, weight, bias) -> np.ndarray:
    """``relu((h + s * |h| * m / |m|) @ W + b)``; a vanishing message is dropped."""
    h_v = np.asarray(h_v, dtype=float)
    m_v = np.asarray(m_v, dtype=float)
    m_norm = np.linalg.norm(m_v)
    if m_norm < _NORM_GUARD:
        return dense_relu(h_v, weight, bias)
    return dense_relu(h_v + s * np.linalg.norm(h_v) * m_v / m_norm, weight, bias)


# -- batched forward pass ------------------------------------------------------------

@dataclass(frozen=True)
class GraphBatch:
    """Graphs sharing one edge topology, stacked for vectorised evaluation."""

    nodes: np.ndarray  # (B, 5, 7)
    edge_index: np.ndarray  # (E, 2)
    edges: np.ndarray  # (B, E, 4)

    @classmethod
    def from_graphs(cls, graphs: list[FeaturizedGraph]) -> "GraphBatch":
        if not graphs:
            raise ValueError("empty batch")
        index = graphs[0].edge_index
        for g in graphs[1:]:
            if not np.array_equal(g.edge_index, index):
                raise ValueError("all graphs in a batch must share one edge list")
        return cls(
            nodes=np.stack([g.node_features for g in graphs]),
            edge_index=np.array(index),
            edges=np.stack([g.edge_features for g in graphs]),
        )

    def __len__(self):
        return len(self.nodes)

    def take(self, idx) -> "GraphBatch":
        return GraphBatch(self.nodes[idx], self.edge_index, self.edges[idx])


def genconv_batch(batch: GraphBatch, p: GenConvParams, eps: float = DEFAULT_EPS):
    """Node scalars ``(B, 5)`` and edge scalars ``(B, E)`` for a whole batch."""
    n_batch = len(batch)
    ei, ej = batch.edge_index[:, 0], batch.edge_index[:, 1]

    h = batch.nodes @ p["node_encoder.weight"] + p["node_encoder.bias"]  # (B, 5, H)
    e = batch.edges @ p["edge_encoder.weight"] + p["edge_encoder.bias"]  # (B, E, H)

    # dense (receiver v, sender u) layout; edges are undirected
    adj = np.zeros((N_NODES, N_NODES), dtype=bool)
    adj[ei, ej] = adj[ej, ei] = True
    e_dense = np.zeros((n_batch, N_NODES, N_NODES, p.hidden))
    e_dense[:, ei, ej] = e
    e_dense[:, ej, ei] = e

    msg = np.maximum(h[:, None, :, :] + e_dense, 0.0) + eps  # (B, v, u, H)
    z = np.where(adj[None, :, :, None], p["beta"] * msg, -np.inf)
    has_nbr = adj.any(axis=1)
    z_max = np.max(z, axis=2, keepdims=True)
    z_max = np.where(np.isfinite(z_max), z_max, 0.0)
    w = np.exp(z - z_max)
    denom = w.sum(axis=2, keepdims=True)
    w = np.divide(w, denom, out=np.zeros_like(w), where=denom > 0)
    agg = np.sum(w * msg, axis=2)  # (B, 5, H)
    agg[:, ~has_nbr] = 0.0

    m_norm = np.linalg.norm(agg, axis=-1, keepdims=True)
    safe = m_norm >= _NORM_GUARD
    unit = np.divide(agg, m_norm, out=np.zeros_like(agg), where=safe)
    h_norm = np.linalg.norm(h, axis=-1, keepdims=True)
    h_new = np.maximum((h + p["s"] * h_norm * unit) @ p["update.weight"] + p["update.bias"], 0.0)

    node_scalars = h_new @ p["node_head.weight"] + p["node_head.bias"]
    edge_scalars = batch.edges @ p["edge_head.weight"] + p["edge_head.bias"]
    return node_scalars, edge_scalars


def genconv_forward(g: FeaturizedGraph, p: GenConvParams, eps: float = DEFAULT_EPS) -> IntermediateGraph:
    nodes, edges = genconv_batch(GraphBatch.from_graphs([g]), p, eps)
    keys = [tuple(pair) for pair in g.edge_index.tolist()]
    return IntermediateGraph(nodes[0], dict(zip(keys, edges[0].tolist())))


def weight_matrices(node_scalars, edge_index, edge_scalars) -> np.ndarray:
    """Batched symmetric weight matrices ``(B, 5, 5)``; missing edges are 0."""
    node_scalars = np.asarray(node_scalars, dtype=float)
    edge_scalars = np.asarray(edge_scalars, dtype=float)
    w = np.zeros(node_scalars.shape[:-1] + (N_NODES, N_NODES))
    diag = np.arange(N_NODES)
    w[..., diag, diag] = node_scalars
    if len(edge_index):
        ei, ej = np.asarray(edge_index)[:, 0], np.asarray(edge_index)[:, 1]
        w[..., ei, ej] = edge_scalars
        w[..., ej, ei] = edge_scalars
    return w


def assemble_weight_matrix(ig: IntermediateGraph) -> np.ndarray:
    keys = list(ig.edge_scalars)
    index = np.array(keys, dtype=int).reshape(-1, 2)
    values = np.array([ig.edge_scalars[k] for k in keys], dtype=float)
    return weight_matrices(ig.node_scalars, index, values)
