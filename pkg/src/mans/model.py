"""Trainable parameters: structural embeddings, relation embeddings, and
the projection that maps raw visual features into the embedding space.

Parameters are stored row-major float32 (the checkpoint representation);
all score and gradient arithmetic upcasts to float64.
"""

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import CheckpointError
from .features import xavier_bound

MMKC_MAGIC = b"MMKC"
MMKC_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIIQ")


class EntityView(NamedTuple):
    """The pair of ids used to materialize one triple slot.

    ``struct_id`` selects the structural embedding, ``vis_id`` the visual
    one. They coincide for real entities; visual corruption produces views
    where they differ (a virtual entity that exists only for contrast).
    """

    struct_id: int
    vis_id: int


def full_view(entity_id):
    return EntityView(entity_id, entity_id)


@dataclass
class ModelParams:
    E_s: np.ndarray  # n_entities x d structural embeddings
    R: np.ndarray    # n_relations x d relation embeddings
    W: np.ndarray    # d x d_v projection
    d: int
    epoch: int = 0
    seed: int = 0

    @property
    def n_entities(self):
        return self.E_s.shape[0]

    @property
    def n_relations(self):
        return self.R.shape[0]

    @property
    def d_v(self):
        return self.W.shape[1]

    def snapshot(self):
        """Independent copy, safe for concurrent evaluation while training."""
        return ModelParams(
            E_s=self.E_s.copy(), R=self.R.copy(), W=self.W.copy(),
            d=self.d, epoch=self.epoch, seed=self.seed,
        )

    def check_finite(self):
        for name, arr in (("E_s", self.E_s), ("R", self.R), ("W", self.W)):
            if not np.isfinite(arr).all():
                raise FloatingPointError(f"non-finite values in {name}")


def _init_with_rng(n_entities, n_relations, d, d_v, rng, seed=0):
    bound_e = xavier_bound(d, d)
    bound_w = xavier_bound(d, d_v)
    E_s = rng.uniform(-bound_e, bound_e, size=(n_entities, d)).astype(np.float32)
    R = rng.uniform(-bound_e, bound_e, size=(n_relations, d)).astype(np.float32)
    W = rng.uniform(-bound_w, bound_w, size=(d, d_v)).astype(np.float32)
    return ModelParams(E_s=E_s, R=R, W=W, d=d, epoch=0, seed=seed)


def init_params(n_entities, n_relations, d, d_v, seed):
    """Xavier-uniform parameters, deterministic in ``seed``.

    Embedding rows use bound ``sqrt(6/(d+d))``; the projection uses
    ``sqrt(6/(d+d_v))``.
    """
    if min(n_entities, n_relations, d, d_v) <= 0:
        raise ValueError("all dimensions must be positive")
    rng = np.random.default_rng(seed)
    return _init_with_rng(n_entities, n_relations, d, d_v, rng, seed=seed)


def visual_embedding(params, table, entity_id):
    """Projection of the entity's pooled feature into the embedding space."""
    feat = table.pooled_feature(entity_id).astype(np.float64)
    return params.W.astype(np.float64) @ feat


def all_visual_embeddings(params, table):
    """Visual embeddings for every entity, rows matching visual_embedding."""
    W64 = params.W.astype(np.float64)
    return np.stack([W64 @ table.vectors[e].astype(np.float64)
                     for e in range(table.n_entities)])


def renormalize(params, enabled=True):
    """Scale structural rows with L2 norm > 1 back to the unit sphere.

    Rows already inside the ball are left bitwise untouched; relation
    embeddings and the projection are never constrained.
    """
    if not enabled:
        return params
    norms = np.linalg.norm(params.E_s.astype(np.float64), axis=1)
    over = norms > 1.0
    if over.any():
        scaled = params.E_s[over].astype(np.float64) / norms[over, None]
        params.E_s[over] = scaled.astype(np.float32)
    return params


def save_checkpoint(params, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(
            MMKC_MAGIC, MMKC_VERSION,
            params.n_entities, params.n_relations, params.d, params.d_v,
            params.epoch, params.seed,
        ))
        fh.write(np.ascontiguousarray(params.E_s, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(params.R, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(params.W, dtype="<f4").tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise CheckpointError(f"{path}: truncated header")
        magic, version, n_e, n_r, d, d_v, epoch, seed = _HEADER.unpack(header)
        if magic != MMKC_MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        if version != MMKC_VERSION:
            raise CheckpointError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = 4 * (n_e * d + n_r * d + d * d_v)
    if len(payload) != expected:
        raise CheckpointError(f"{path}: payload is {len(payload)} bytes, want {expected}")
    flat = np.frombuffer(payload, dtype="<f4")
    E_s = flat[: n_e * d].reshape(n_e, d).copy()
    R = flat[n_e * d: n_e * d + n_r * d].reshape(n_r, d).copy()
    W = flat[n_e * d + n_r * d:].reshape(d, d_v).copy()
    return ModelParams(E_s=E_s, R=R, W=W, d=d, epoch=epoch, seed=seed)


def export_embeddings(params, table, vocab, path):
    """Write structural and visual embeddings as TSV for external tooling.

    One line per entity and type: ``name<TAB>type<TAB>v1..v_d`` with type
    in {structural, visual}.
    """
    E_v = all_visual_embeddings(params, table)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for idx in range(params.n_entities):
            name = vocab.name_of(idx)
            struct_vals = "\t".join(repr(float(v)) for v in params.E_s[idx])
            vis_vals = "\t".join(repr(float(v)) for v in E_v[idx])
            fh.write(f"{name}\tstructural\t{struct_vals}\n")
            fh.write(f"{name}\tvisual\t{vis_vals}\n")
