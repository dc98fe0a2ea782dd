"""Input validation helpers shared by the estimator and the CLI."""

import numpy as np

from .data import Triple
from .scoring import NORMS


def check_triples(X, n_entities=None, n_relations=None):
    """Coerce ``X`` to a list of Triple, validating shape and id ranges.

    Accepts an (n, 3) integer array-like or an iterable of (head, rel,
    tail) rows.
    """
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) triple array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == arr.astype(np.int64)):
            raise ValueError("triple ids must be integers")
        arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise ValueError("triple ids must be non-negative")
    if n_entities is not None and arr.size:
        max_ent = int(max(arr[:, 0].max(), arr[:, 2].max()))
        if max_ent >= n_entities:
            raise ValueError(f"entity id {max_ent} out of range [0, {n_entities})")
    if n_relations is not None and arr.size and int(arr[:, 1].max()) >= n_relations:
        raise ValueError(f"relation id {int(arr[:, 1].max())} out of range [0, {n_relations})")
    return [Triple(int(h), int(r), int(t)) for h, r, t in arr]


def check_entity_ids(ids, n_entities):
    arr = np.asarray(ids)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d array of entity ids, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= n_entities):
        raise ValueError(f"entity ids must lie in [0, {n_entities})")
    return arr.astype(np.int64)


def check_norm(norm):
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    return norm


def check_in_unit_interval(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def check_fitted(estimator, attribute="model_"):
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )
