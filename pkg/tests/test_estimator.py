import numpy as np
import pytest

from mans.estimator import MultimodalTransE
from toykg import make_toy_kg


@pytest.fixture(scope="module")
def fitted():
    dataset, table = make_toy_kg(n_entities=20, n_relations=3, d_v=6, seed=4)
    model = MultimodalTransE(embedding_dim=12, epochs=30, num_batches=5,
                             sampler="mans_h", beta2=0.25, seed=4)
    model.fit(dataset, features=table)
    return model, dataset, table


class TestSklearnProtocol:
    def test_get_params_round_trips_through_set_params(self):
        model = MultimodalTransE(embedding_dim=9, sampler="mans_a", margin=6.0)
        clone = MultimodalTransE().set_params(**model.get_params())
        assert clone.get_params() == model.get_params()

    def test_constructor_args_stored_verbatim(self):
        model = MultimodalTransE(embedding_dim=7, learning_rate=0.5)
        assert model.get_params()["embedding_dim"] == 7
        assert model.get_params()["learning_rate"] == 0.5

    def test_unknown_param_rejected(self):
        with pytest.raises(ValueError, match="invalid parameter"):
            MultimodalTransE().set_params(window_size=3)

    def test_sklearn_clone_if_available(self):
        sklearn = pytest.importorskip("sklearn")
        from sklearn.base import clone
        model = MultimodalTransE(embedding_dim=5, sampler="mans_t", beta1=0.2)
        cloned = clone(model)
        assert cloned.get_params() == model.get_params()

    def test_fit_returns_self_and_sets_fitted_attrs(self, fitted):
        model, dataset, _ = fitted
        assert model.n_entities_ == 20
        assert model.n_relations_ == 3
        assert model.model_.E_s.shape == (20, 12)
        assert len(model.history_) == 30


class TestFitInputs:
    def test_fit_from_plain_array(self):
        X = np.array([[0, 0, 1], [1, 0, 2], [2, 1, 0], [0, 1, 2]])
        model = MultimodalTransE(embedding_dim=4, feature_dim=3, epochs=2,
                                 num_batches=2, seed=0)
        model.fit(X)
        assert model.n_entities_ == 3
        assert model.n_relations_ == 2

    def test_bad_shape_rejected(self):
        model = MultimodalTransE(feature_dim=2)
        with pytest.raises(ValueError, match=r"\(n, 3\)"):
            model.fit(np.zeros((4, 2), dtype=int))

    def test_feature_array_accepted(self):
        X = np.array([[0, 0, 1], [1, 0, 0]])
        feats = np.ones((2, 5), dtype=np.float32)
        model = MultimodalTransE(embedding_dim=4, epochs=1, num_batches=1, seed=0)
        model.fit(X, features=feats)
        assert model.features_.d_v == 5

    def test_mismatched_feature_rows_rejected(self):
        X = np.array([[0, 0, 1]])
        model = MultimodalTransE(embedding_dim=4, epochs=1, num_batches=1)
        with pytest.raises(ValueError, match="features"):
            model.fit(X, features=np.ones((5, 3)))


class TestPredictTransform:
    def test_predict_requires_fit(self):
        with pytest.raises(RuntimeError, match="not fitted"):
            MultimodalTransE().predict([[0, 0, 1]])

    def test_known_triples_outscore_random_noise(self, fitted):
        model, dataset, _ = fitted
        train = dataset.store.train[:20]
        known = np.array([tuple(t) for t in train])
        rng = np.random.default_rng(0)
        garbage = np.column_stack([
            rng.integers(20, size=50), rng.integers(3, size=50), rng.integers(20, size=50),
        ])
        assert model.predict(known).mean() > model.predict(garbage).mean()

    def test_predict_validates_ranges(self, fitted):
        model, _, _ = fitted
        with pytest.raises(ValueError, match="out of range"):
            model.predict([[0, 0, 99]])

    def test_transform_returns_embedding_rows(self, fitted):
        model, _, _ = fitted
        out = model.transform([0, 3, 3])
        assert out.shape == (3, 12)
        assert np.array_equal(out[1], out[2])
        assert np.array_equal(out[0], model.model_.E_s[0])

    def test_score_samples_matches_predict(self, fitted):
        model, dataset, _ = fitted
        X = np.array([tuple(t) for t in dataset.store.valid[:5]])
        assert np.array_equal(model.predict(X), model.score_samples(X))


def test_refit_with_same_seed_is_reproducible():
    dataset, table = make_toy_kg(n_entities=15, n_relations=2, d_v=4, seed=9)
    a = MultimodalTransE(embedding_dim=6, epochs=5, num_batches=3, seed=11)
    b = MultimodalTransE(embedding_dim=6, epochs=5, num_batches=3, seed=11)
    a.fit(dataset, features=table)
    b.fit(dataset, features=table)
    assert np.array_equal(a.model_.E_s, b.model_.E_s)
    assert np.array_equal(a.model_.W, b.model_.W)
