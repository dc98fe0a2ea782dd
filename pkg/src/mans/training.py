"""Margin-rank training: loss, analytic gradients, lazy Adam, epoch loop.

Gradients are exact subgradients of the hinge over the four-term score,
accumulated sparsely by touched row. Everything numeric runs in float64
and is written back to the float32 parameter store, so two runs with the
same configuration produce bitwise-identical parameters.
"""

import math
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import TrainingDivergedError
from .model import _init_with_rng, full_view, renormalize, save_checkpoint
from .sampling import Sampler, SamplerConfig
from .scoring import L1, NORMS, ScoreParts


def margin_loss(pos, neg, gamma):
    """Hinge ``max(0, gamma - score(pos) + score(neg))``."""
    if gamma <= 0:
        raise ValueError(f"margin must be positive, got {gamma}")
    return max(0.0, gamma - pos.total + neg.total)


class GradientBuffer:
    """Sparse per-row accumulators for embeddings plus a dense projection
    accumulator. Rows never touched by the batch stay absent."""

    def __init__(self, d, d_v):
        self.d = d
        self.d_v = d_v
        self.entity = {}
        self.relation = {}
        self.W = None

    def add_entity(self, row, grad):
        acc = self.entity.get(row)
        if acc is None:
            self.entity[row] = grad.copy()
        else:
            acc += grad

    def add_relation(self, row, grad):
        acc = self.relation.get(row)
        if acc is None:
            self.relation[row] = grad.copy()
        else:
            acc += grad

    def add_w_outer(self, gvec, feat):
        if self.W is None:
            self.W = np.zeros((self.d, self.d_v), dtype=np.float64)
        self.W += np.outer(gvec, feat)

    def is_empty(self):
        return not self.entity and not self.relation and self.W is None


class _BatchWorkspace:
    """Float64 views over the parameters, with visual embeddings cached for
    the duration of one batch (the projection is constant until the step)."""

    def __init__(self, params, table, norm):
        self.params = params
        self.table = table
        self.norm = norm
        self.W64 = params.W.astype(np.float64)
        self._vis = {}

    def struct(self, e):
        return self.params.E_s[e].astype(np.float64)

    def rel(self, r):
        return self.params.R[r].astype(np.float64)

    def vis(self, e):
        vec = self._vis.get(e)
        if vec is None:
            vec = self.W64 @ self.table.vectors[e].astype(np.float64)
            self._vis[e] = vec
        return vec

    def feat(self, e):
        return self.table.vectors[e].astype(np.float64)


def _norm_value(u, norm):
    if norm == L1:
        return float(np.sum(np.abs(u)))
    return float(np.sqrt(np.sum(u * u)))


def _norm_grad(u, norm):
    """Gradient of ``|u|_p`` w.r.t. ``u``; sign convention sign(0) = 0,
    and the L2 gradient is zeroed when the residual is numerically zero."""
    if norm == L1:
        return np.sign(u)
    n = math.sqrt(float(np.sum(u * u)))
    if n < 1e-12:
        return np.zeros_like(u)
    return u / n


def _triple_terms(ws, head_view, rel, tail_view):
    """Score parts plus the four residual vectors of one triple."""
    h_s = ws.struct(head_view.struct_id)
    t_s = ws.struct(tail_view.struct_id)
    h_v = ws.vis(head_view.vis_id)
    t_v = ws.vis(tail_view.vis_id)
    r = ws.rel(rel)
    hs_r = h_s + r
    hv_r = h_v + r
    residuals = (hs_r - t_s, hv_r - t_v, hs_r - t_v, hv_r - t_s)
    parts = ScoreParts(*(-_norm_value(u, ws.norm) for u in residuals))
    return parts, residuals


def _accumulate_pair(buffer, ws, pos, neg, gamma):
    """Add one (positive, negative) pair's subgradients; returns its loss.

    An inactive hinge contributes nothing to any accumulator.
    """
    pos_views = (full_view(pos.head), pos.rel, full_view(pos.tail))
    neg_views = (neg.head, neg.rel, neg.tail)
    pos_parts, pos_res = _triple_terms(ws, *pos_views)
    neg_parts, neg_res = _triple_terms(ws, *neg_views)
    loss = margin_loss(pos_parts, neg_parts, gamma)
    if loss <= 0.0:
        return loss

    for coef, (head_view, rel, tail_view), residuals in (
        (-1.0, pos_views, pos_res),
        (+1.0, neg_views, neg_res),
    ):
        g_ss, g_vv, g_sv, g_vs = (_norm_grad(u, ws.norm) for u in residuals)
        buffer.add_entity(head_view.struct_id, coef * -(g_ss + g_sv))
        buffer.add_entity(tail_view.struct_id, coef * (g_ss + g_vs))
        buffer.add_relation(rel, coef * -((g_ss + g_vv) + (g_sv + g_vs)))
        # Visual-side gradients reach only the projection, via the outer
        # product with the frozen pooled feature.
        buffer.add_w_outer(coef * -(g_vv + g_vs), ws.feat(head_view.vis_id))
        buffer.add_w_outer(coef * (g_vv + g_sv), ws.feat(tail_view.vis_id))
    return loss


def compute_gradients(params, table, pos, neg, gamma, norm=L1):
    """Subgradients of the pair hinge w.r.t. every touched parameter row."""
    buffer = GradientBuffer(params.d, params.d_v)
    ws = _BatchWorkspace(params, table, norm)
    _accumulate_pair(buffer, ws, pos, neg, gamma)
    return buffer


@dataclass
class AdamState:
    m_entity: np.ndarray
    v_entity: np.ndarray
    m_relation: np.ndarray
    v_relation: np.ndarray
    m_W: np.ndarray
    v_W: np.ndarray
    step: int = 0


def init_adam_state(params):
    zeros = lambda arr: np.zeros(arr.shape, dtype=np.float64)
    return AdamState(
        m_entity=zeros(params.E_s), v_entity=zeros(params.E_s),
        m_relation=zeros(params.R), v_relation=zeros(params.R),
        m_W=zeros(params.W), v_W=zeros(params.W),
    )


def _adam_update_row(param_rows, m, v, row, grad, lr, d1, d2, eps, bc1, bc2):
    m[row] = d1 * m[row] + (1.0 - d1) * grad
    v[row] = d2 * v[row] + (1.0 - d2) * (grad * grad)
    step = lr * (m[row] / bc1) / (np.sqrt(v[row] / bc2) + eps)
    updated = param_rows[row].astype(np.float64) - step
    if not np.isfinite(updated).all():
        raise FloatingPointError(f"non-finite parameter row {row} after update")
    param_rows[row] = updated.astype(np.float32)


def adam_step(params, buffer, state, config):
    """One bias-corrected Adam step over the touched rows only.

    Moments of untouched rows do not decay (lazy variant); an empty buffer
    is a no-op that leaves the step counter unchanged.
    """
    if buffer.is_empty():
        return params, state
    state.step += 1
    d1, d2 = config.adam_decay1, config.adam_decay2
    bc1 = 1.0 - d1 ** state.step
    bc2 = 1.0 - d2 ** state.step
    lr, eps = config.learning_rate, config.adam_eps
    for row in sorted(buffer.entity):
        _adam_update_row(params.E_s, state.m_entity, state.v_entity,
                         row, buffer.entity[row], lr, d1, d2, eps, bc1, bc2)
    for row in sorted(buffer.relation):
        _adam_update_row(params.R, state.m_relation, state.v_relation,
                         row, buffer.relation[row], lr, d1, d2, eps, bc1, bc2)
    if buffer.W is not None:
        state.m_W = d1 * state.m_W + (1.0 - d1) * buffer.W
        state.v_W = d2 * state.v_W + (1.0 - d2) * (buffer.W * buffer.W)
        step = lr * (state.m_W / bc1) / (np.sqrt(state.v_W / bc2) + eps)
        updated = params.W.astype(np.float64) - step
        if not np.isfinite(updated).all():
            raise FloatingPointError("non-finite projection after update")
        params.W = updated.astype(np.float32)
    return params, state


@dataclass
class TrainConfig:
    embedding_dim: int = 128
    margin: float = 4.0
    learning_rate: float = 0.01
    epochs: int = 1000
    num_batches: Optional[int] = 400
    batch_size: Optional[int] = None
    norm: str = L1
    seed: int = 0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    adam_decay1: float = 0.9
    adam_decay2: float = 0.999
    adam_eps: float = 1e-8
    renormalize: bool = True
    checkpoint_every: int = 0

    def validate(self):
        if self.embedding_dim <= 0:
            raise ValueError("embedding_dim must be positive")
        if self.margin <= 0:
            raise ValueError(f"margin must be positive, got {self.margin}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if (self.num_batches is None) == (self.batch_size is None):
            raise ValueError("set exactly one of num_batches / batch_size")
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}")
        self.sampler.validate()
        return self


class EpochStats(NamedTuple):
    epoch: int
    mean_loss: float
    mean_beta3: Optional[float]
    wall_ms: float


def write_run_log(log, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in log:
            beta = "-" if rec.mean_beta3 is None else f"{rec.mean_beta3:.6f}"
            fh.write(f"{rec.epoch}\t{rec.mean_loss:.6f}\t{beta}\t{int(rec.wall_ms)}\n")


def _epoch_batches(n, config, shuffle_rng):
    perm = shuffle_rng.permutation(n)
    if config.num_batches is not None:
        return [idx for idx in np.array_split(perm, min(config.num_batches, n)) if len(idx)]
    size = config.batch_size
    return [perm[i: i + size] for i in range(0, n, size)]


def train(dataset, features, config, checkpoint_dir=None):
    """Run the full training schedule; returns final parameters and the log.

    Each epoch shuffles the train split with the seeded generator and
    partitions it into near-equal contiguous batches. Per batch: sample
    one negative per positive per round, accumulate subgradients over all
    pairs, take a single Adam step, then re-project structural rows onto
    the unit ball when enabled.
    """
    config.validate()
    n_entities = len(dataset.entities)
    n_relations = len(dataset.relations)
    train_triples = dataset.store.train

    init_seq, shuffle_seq, sampler_seq = np.random.SeedSequence(config.seed).spawn(3)
    params = _init_with_rng(
        n_entities, n_relations, config.embedding_dim, features.d_v,
        np.random.default_rng(init_seq), seed=config.seed,
    )
    state = init_adam_state(params)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    sampler = Sampler(
        replace(config.sampler, epochs=config.epochs),
        n_entities,
        filter_index=dataset.store.filter_index,
        rng=np.random.default_rng(sampler_seq),
    )

    log = []
    for epoch in range(config.epochs):
        started = time.perf_counter()
        loss_sum = 0.0
        pair_count = 0
        beta3_sum = 0.0
        beta3_count = 0
        for batch_no, idxs in enumerate(_epoch_batches(len(train_triples), config, shuffle_rng)):
            batch = [train_triples[i] for i in idxs]
            negatives, beta3 = sampler.sample_batch(
                batch, epoch=epoch, params=params, table=features, norm=config.norm
            )
            if beta3 is not None:
                beta3_sum += beta3
                beta3_count += 1
            buffer = GradientBuffer(params.d, params.d_v)
            ws = _BatchWorkspace(params, features, config.norm)
            for j, neg in enumerate(negatives):
                pos = batch[j % len(batch)]
                loss = _accumulate_pair(buffer, ws, pos, neg, config.margin)
                if not math.isfinite(loss):
                    raise TrainingDivergedError(epoch, batch_no, pos)
                loss_sum += loss
                pair_count += 1
            adam_step(params, buffer, state, config)
            renormalize(params, config.renormalize)
        params.epoch = epoch + 1
        log.append(EpochStats(
            epoch=epoch + 1,
            mean_loss=loss_sum / max(pair_count, 1),
            mean_beta3=(beta3_sum / beta3_count) if beta3_count else None,
            wall_ms=(time.perf_counter() - started) * 1000.0,
        ))
        if (checkpoint_dir is not None and config.checkpoint_every
                and (epoch + 1) % config.checkpoint_every == 0):
            save_checkpoint(params, f"{checkpoint_dir}/epoch_{epoch + 1:06d}.mmkc")
    if checkpoint_dir is not None:
        save_checkpoint(params, f"{checkpoint_dir}/epoch_{config.epochs:06d}.mmkc")
    return params, log
