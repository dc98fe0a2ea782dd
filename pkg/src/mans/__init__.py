"""Multimodal knowledge-graph embedding with modality-aware negative sampling."""

from .data import Dataset, Triple, TripleStore, Vocab, load_dataset
from .estimator import MultimodalTransE
from .evaluation import (
    ClassifMetrics, LinkPredMetrics, link_prediction, rank_of, triple_classification,
)
from .features import FeatureTable, load_features, pooled_feature, write_mmkf, xavier_fill
from .model import (
    EntityView, ModelParams, export_embeddings, full_view, init_params,
    load_checkpoint, renormalize, save_checkpoint, visual_embedding,
)
from .sampling import (
    NegativeTriple, Sampler, SamplerConfig, sample_batch_adaptive,
    sample_batch_hybrid, sample_normal, sample_visual, select_strategy_mans_t,
)
from .scoring import ScoreParts, f_transe, needs_visual_ns, score_triple
from .training import (
    AdamState, GradientBuffer, TrainConfig, adam_step, compute_gradients,
    init_adam_state, margin_loss, train,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "ClassifMetrics", "Dataset", "EntityView", "FeatureTable",
    "GradientBuffer", "LinkPredMetrics", "ModelParams", "MultimodalTransE",
    "NegativeTriple", "Sampler", "SamplerConfig", "ScoreParts", "TrainConfig",
    "Triple", "TripleStore", "Vocab", "adam_step", "compute_gradients",
    "export_embeddings", "f_transe", "full_view", "init_adam_state",
    "init_params", "link_prediction", "load_checkpoint", "load_dataset",
    "load_features", "margin_loss", "needs_visual_ns", "pooled_feature",
    "rank_of", "renormalize", "sample_batch_adaptive", "sample_batch_hybrid",
    "sample_normal", "sample_visual", "save_checkpoint", "score_triple",
    "select_strategy_mans_t", "train", "triple_classification",
    "visual_embedding", "write_mmkf", "xavier_fill",
]
