"""Negative-triple generation.

Two corruption primitives exist: entity-level (replace one slot's entity
outright) and visual-level (keep the slot's structural embedding, swap in
another entity's visual embedding, yielding a virtual entity). The five
strategies differ only in how they mix the two:

* ``normal``  - entity-level only
* ``mans_v``  - visual-level only
* ``mans_t``  - visual for the first ``floor(beta1 * epochs)`` epochs, then normal
* ``mans_h``  - per batch, a fixed fraction ``beta2`` of the negatives are visual
* ``mans_a``  - like ``mans_h`` but the fraction is recomputed per batch from
  the current scores

Every strategy is routed through the hybrid batch sampler, so the
degenerate settings (beta 0 or 1) consume the random stream identically
to the pure samplers and emit identical negatives.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import CannotCorruptError
from .model import EntityView, full_view
from .scoring import needs_visual_ns, score_triple

NORMAL = "normal"
VISUAL = "visual"
STRATEGIES = ("normal", "mans_v", "mans_t", "mans_h", "mans_a")


class NegativeTriple(NamedTuple):
    head: EntityView
    rel: int
    tail: EntityView
    strategy_used: str  # "normal" or "visual"


@dataclass
class SamplerConfig:
    strategy: str = "normal"
    beta1: float = 0.4   # stage-switch fraction for mans_t
    beta2: float = 0.3   # per-batch visual fraction for mans_h
    k: int = 1           # negatives per positive
    epochs: int = 1000
    seed: int = 0
    filter_false_negatives: bool = False

    def validate(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}, expected one of {STRATEGIES}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        return self


def round_half_up(x):
    return int(math.floor(x + 0.5))


def _draw_slot(rng):
    return "head" if rng.integers(2) == 0 else "tail"


def _draw_replacement(original, n_entities, rng, reject=None, max_rejects=100):
    if n_entities < 2:
        raise CannotCorruptError(f"need >= 2 entities to corrupt, have {n_entities}")
    rejects = 0
    while True:
        candidate = int(rng.integers(n_entities))
        if candidate == original:
            continue
        # The reject predicate is advisory (false-negative filtering); give
        # up on it in dense graphs rather than loop forever.
        if reject is not None and rejects < max_rejects and reject(candidate):
            rejects += 1
            continue
        return candidate


def sample_normal(pos, n_entities, rng, reject=None):
    """Entity-level corruption: one slot replaced by a distinct entity.

    The corrupted slot's structural and visual ids both point at the
    replacement, exactly as if the triple had named that entity.
    """
    slot = _draw_slot(rng)
    if slot == "head":
        replacement = _draw_replacement(pos.head, n_entities, rng,
                                        None if reject is None else lambda c: reject(c, pos, "head"))
        return NegativeTriple(full_view(replacement), pos.rel, full_view(pos.tail), NORMAL)
    replacement = _draw_replacement(pos.tail, n_entities, rng,
                                    None if reject is None else lambda c: reject(c, pos, "tail"))
    return NegativeTriple(full_view(pos.head), pos.rel, full_view(replacement), NORMAL)


def sample_visual(pos, n_entities, rng):
    """Visual-level corruption: one slot keeps its structural embedding but
    borrows another entity's visual embedding (a virtual entity)."""
    slot = _draw_slot(rng)
    if slot == "head":
        replacement = _draw_replacement(pos.head, n_entities, rng)
        return NegativeTriple(EntityView(pos.head, replacement), pos.rel,
                              full_view(pos.tail), VISUAL)
    replacement = _draw_replacement(pos.tail, n_entities, rng)
    return NegativeTriple(full_view(pos.head), pos.rel,
                          EntityView(pos.tail, replacement), VISUAL)


def select_strategy_mans_t(epoch, config):
    """Stage for the two-stage schedule: visual first, then normal.

    The turning point is ``floor(beta1 * epochs)``; epochs below it form
    the visual stage.
    """
    turning_point = math.floor(config.beta1 * config.epochs)
    return VISUAL if epoch < turning_point else NORMAL


def sample_batch_hybrid(batch, beta, k, n_entities, rng, reject=None):
    """Mixed batch: ``round_half_up(beta * k * N)`` visual negatives, the
    rest entity-level, visual slots placed uniformly at random.

    Emits one negative per positive per round, order preserved within each
    of the ``k`` rounds. For beta 0 or 1 no placement randomness is
    consumed, so the stream degenerates to the pure samplers exactly.
    """
    total = k * len(batch)
    n_visual = round_half_up(beta * total)
    if 0 < n_visual < total:
        visual_slots = set(rng.choice(total, size=n_visual, replace=False).tolist())
    elif n_visual >= total:
        visual_slots = set(range(total))
    else:
        visual_slots = set()

    negatives = []
    slot = 0
    for _ in range(k):
        for pos in batch:
            if slot in visual_slots:
                negatives.append(sample_visual(pos, n_entities, rng))
            else:
                negatives.append(sample_normal(pos, n_entities, rng, reject=reject))
            slot += 1
    return negatives


def adaptive_proportion(batch, params, table, norm):
    """Fraction of batch triples whose cross-modality score half trails the
    same-modality half, computed on the pre-update parameters."""
    flags = [
        needs_visual_ns(score_triple(params, table, full_view(h), r, full_view(t), norm))
        for h, r, t in batch
    ]
    return sum(flags) / len(flags)


def sample_batch_adaptive(batch, params, table, k, n_entities, norm, rng, reject=None):
    """Hybrid batch whose visual fraction is measured from the batch itself.

    Returns the negatives and the measured fraction for logging.
    """
    if not batch:
        raise ValueError("adaptive sampling needs a nonempty batch")
    beta3 = adaptive_proportion(batch, params, table, norm)
    return sample_batch_hybrid(batch, beta3, k, n_entities, rng, reject=reject), beta3


@dataclass
class Sampler:
    """Strategy dispatcher owning one seeded generator.

    A single producer drives each instance; for parallel sampling create
    independent instances with sub-seeds derived from (seed, batch index).
    """

    config: SamplerConfig
    n_entities: int
    filter_index: frozenset = None
    rng: np.random.Generator = field(default=None)

    def __post_init__(self):
        self.config.validate()
        if self.rng is None:
            self.rng = np.random.default_rng(self.config.seed)
        self._reject = None
        if self.config.filter_false_negatives:
            if self.filter_index is None:
                raise ValueError("filter_false_negatives requires a filter index")
            self._reject = self._known_triple

    def _known_triple(self, candidate, pos, slot):
        if slot == "head":
            return (candidate, pos.rel, pos.tail) in self.filter_index
        return (pos.head, pos.rel, candidate) in self.filter_index

    def batch_beta(self, epoch):
        """Visual fraction for strategies that fix it outside the batch."""
        strategy = self.config.strategy
        if strategy == "normal":
            return 0.0
        if strategy == "mans_v":
            return 1.0
        if strategy == "mans_t":
            return 1.0 if select_strategy_mans_t(epoch, self.config) == VISUAL else 0.0
        if strategy == "mans_h":
            return self.config.beta2
        raise ValueError(f"strategy {self.config.strategy!r} has no fixed proportion")

    def sample_batch(self, batch, epoch=0, params=None, table=None, norm="L1"):
        """Negatives for one batch; returns ``(negatives, beta3 or None)``."""
        if self.config.strategy == "mans_a":
            if params is None or table is None:
                raise ValueError("strategy mans_a needs params and features")
            return sample_batch_adaptive(
                batch, params, table, self.config.k, self.n_entities, norm,
                self.rng, reject=self._reject,
            )
        beta = self.batch_beta(epoch)
        negatives = sample_batch_hybrid(
            batch, beta, self.config.k, self.n_entities, self.rng, reject=self._reject
        )
        return negatives, None
