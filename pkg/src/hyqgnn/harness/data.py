"""Dataset ingestion and seeded splitting."""

from __future__ import annotations

import logging

import numpy as np

from ..errors import InsufficientData
from ..featurize import FeaturizedGraph, load_graphs_json

log = logging.getLogger(__name__)


def load_dataset(path) -> list[FeaturizedGraph]:
    """Read a featurized JSON dataset; every record must carry ``target_ev``."""
    graphs = load_graphs_json(path, require_target=True)
    log.info("loaded %d graphs from %s", len(graphs), path)
    return graphs


def split_dataset(data, sizes, seed: int):
    """Shuffle with ``seed`` then cut contiguous (train, val, test) slices."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != 3 or any(s < 0 for s in sizes):
        raise ValueError("sizes must be three non-negative counts")
    if sum(sizes) > len(data):
        raise InsufficientData(f"split {sizes} needs {sum(sizes)} records, have {len(data)}")
    order = np.random.default_rng(seed).permutation(len(data))
    n_train, n_val, n_test = sizes
    cuts = [order[:n_train], order[n_train:n_train + n_val],
            order[n_train + n_val:n_train + n_val + n_test]]
    return tuple([data[i] for i in idx] for idx in cuts)
