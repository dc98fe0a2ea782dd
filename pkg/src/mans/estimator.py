"""Scikit-learn style estimator wrapping the training engine.

``MultimodalTransE`` follows the fit/transform/predict conventions:
constructor arguments are stored verbatim, ``get_params``/``set_params``
make it clonable by sklearn tooling, and fitted state lives in
trailing-underscore attributes.
"""

import inspect

import numpy as np

from .data import TripleStore, Dataset, Vocab
from .features import FeatureTable, xavier_fill
from .model import full_view
from .sampling import SamplerConfig
from .scoring import score_triple
from .training import TrainConfig, train
from .validation import check_entity_ids, check_fitted, check_triples


class ParamsMixin:
    """get_params/set_params over the constructor signature, so instances
    compose with sklearn's clone and grid-search machinery."""

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return sorted(
            name for name, p in sig.parameters.items()
            if name != "self" and p.kind != p.VAR_KEYWORD
        )

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(f"invalid parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self


class MultimodalTransE(ParamsMixin):
    """Translation embeddings over structural and visual modalities.

    Parameters mirror the training configuration; ``sampler`` picks the
    negative-sampling strategy (normal, mans_v, mans_t, mans_h, mans_a).

    Examples
    --------
    >>> model = MultimodalTransE(embedding_dim=16, feature_dim=8, epochs=5,
    ...                          num_batches=4, sampler="mans_a", seed=1)
    >>> model.fit(train_triples)                    # doctest: +SKIP
    >>> scores = model.predict(test_triples)        # doctest: +SKIP
    """

    def __init__(self, embedding_dim=128, feature_dim=None, sampler="normal",
                 beta1=0.4, beta2=0.3, k=1, epochs=100, num_batches=None,
                 batch_size=None, margin=4.0, learning_rate=0.01, norm="L1",
                 renormalize=True, seed=0, adam_decay1=0.9, adam_decay2=0.999,
                 adam_eps=1e-8, filter_false_negatives=False):
        self.embedding_dim = embedding_dim
        self.feature_dim = feature_dim
        self.sampler = sampler
        self.beta1 = beta1
        self.beta2 = beta2
        self.k = k
        self.epochs = epochs
        self.num_batches = num_batches
        self.batch_size = batch_size
        self.margin = margin
        self.learning_rate = learning_rate
        self.norm = norm
        self.renormalize = renormalize
        self.seed = seed
        self.adam_decay1 = adam_decay1
        self.adam_decay2 = adam_decay2
        self.adam_eps = adam_eps
        self.filter_false_negatives = filter_false_negatives

    def _train_config(self):
        num_batches = self.num_batches
        if num_batches is None and self.batch_size is None:
            num_batches = 10
        return TrainConfig(
            embedding_dim=self.embedding_dim,
            margin=self.margin,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            num_batches=num_batches,
            batch_size=self.batch_size,
            norm=self.norm,
            seed=self.seed,
            sampler=SamplerConfig(
                strategy=self.sampler, beta1=self.beta1, beta2=self.beta2,
                k=self.k, epochs=self.epochs, seed=self.seed,
                filter_false_negatives=self.filter_false_negatives,
            ),
            adam_decay1=self.adam_decay1,
            adam_decay2=self.adam_decay2,
            adam_eps=self.adam_eps,
            renormalize=self.renormalize,
        ).validate()

    def _resolve_inputs(self, X, features):
        if isinstance(X, Dataset):
            dataset = X
        else:
            if isinstance(X, TripleStore):
                store = X
            else:
                triples = check_triples(X)
                store = TripleStore(train=triples, valid=[], test=[])
            n_entities = 1 + max(
                (max(t.head, t.tail) for t in store.filter_index), default=-1
            )
            n_relations = 1 + max((t.rel for t in store.filter_index), default=-1)
            dataset = Dataset(
                Vocab(str(i) for i in range(n_entities)),
                Vocab(str(i) for i in range(n_relations)),
                store,
            )
        if features is None:
            d_v = self.feature_dim or self.embedding_dim
            features = xavier_fill(len(dataset.entities), d_v, self.embedding_dim, self.seed)
        elif not isinstance(features, FeatureTable):
            arr = np.asarray(features, dtype=np.float32)
            if arr.ndim != 2 or arr.shape[0] != len(dataset.entities):
                raise ValueError(
                    f"features must be (n_entities, d_v), got {arr.shape} for "
                    f"{len(dataset.entities)} entities"
                )
            features = FeatureTable(arr, ["from-file"] * arr.shape[0])
        return dataset, features

    def fit(self, X, features=None):
        """Train on triples.

        ``X`` may be an (n, 3) id array, a TripleStore, or a full Dataset;
        ``features`` an (n_entities, d_v) array or FeatureTable. Without
        features every entity gets a seeded random vector.
        """
        dataset, table = self._resolve_inputs(X, features)
        config = self._train_config()
        self.model_, self.history_ = train(dataset, table, config)
        self.dataset_ = dataset
        self.features_ = table
        self.n_entities_ = self.model_.n_entities
        self.n_relations_ = self.model_.n_relations
        return self

    def predict(self, X):
        """Plausibility score of each triple (higher is more plausible)."""
        return self.score_samples(X)

    def score_samples(self, X):
        check_fitted(self)
        triples = check_triples(X, self.n_entities_, self.n_relations_)
        return np.array([
            score_triple(self.model_, self.features_,
                         full_view(h), r, full_view(t), self.norm).total
            for h, r, t in triples
        ])

    def transform(self, entity_ids):
        """Structural embeddings for the given entity ids."""
        check_fitted(self)
        ids = check_entity_ids(entity_ids, self.n_entities_)
        return self.model_.E_s[ids].copy()
