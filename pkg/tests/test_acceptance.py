"""Acceptance suite: one test per release criterion, each printing a
PASS line (run with ``pytest tests/test_acceptance.py -v -s``).

Full-scale benchmark numbers are documentation targets only; everything
here is property-based or toy-scale with independent oracles.
"""

import math
import pickle
import time
import warnings

import numpy as np
import pytest

from mans.data import Triple, TripleStore
from mans.evaluation import confusion_metrics, link_prediction, triple_classification
from mans.features import FeatureTable
from mans.model import full_view, init_params, renormalize, save_checkpoint
from mans.sampling import Sampler, SamplerConfig, sample_batch_adaptive
from mans.scoring import f_transe, score_triple
from mans.training import TrainConfig, compute_gradients, train

from oracles import oracle_link_prediction, ranking_fixture
from test_training import fd_check, random_fd_case
from toykg import make_toy_kg


def ok(n, message):
    print(f"\nACCEPTANCE {n} PASS: {message}")


@pytest.fixture(scope="module")
def toy():
    return make_toy_kg(n_entities=50, n_relations=5, d_v=16, seed=0)


_RUNS = {}


def run_toy(toy_data, strategy, seed):
    """Train once per (strategy, seed) and cache params/log/valid metrics."""
    key = (strategy, seed)
    if key not in _RUNS:
        dataset, table = toy_data
        config = TrainConfig(
            embedding_dim=24, margin=4.0, learning_rate=0.01, epochs=200,
            num_batches=10, norm="L1", seed=seed,
            sampler=SamplerConfig(strategy=strategy, beta2=0.3, seed=seed),
        )
        params, log = train(dataset, table, config)
        metrics = link_prediction(params, table, dataset.store, split="valid", norm="L1")
        _RUNS[key] = (params, log, metrics)
    return _RUNS[key]


def test_1_gradient_finite_difference_oracle():
    """Analytic gradients vs central differences on 20 random configs per norm."""
    started = time.perf_counter()
    worst = {"L2": 0.0, "L1": 0.0}
    for norm, seed in (("L2", 2024), ("L1", 4202)):
        rng = np.random.default_rng(seed)
        cases = 0
        while cases < 20:
            case = random_fd_case(rng, norm)
            if case is None:
                continue
            params, table, pos, neg, gamma, residuals = case
            err, checked = fd_check(params, table, pos, neg, gamma, norm, residuals)
            assert checked > 0
            worst[norm] = max(worst[norm], err)
            cases += 1
        assert worst[norm] < 1e-4
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    ok(1, f"max FD relative error L2={worst['L2']:.2e}, L1={worst['L1']:.2e} "
          f"in {elapsed:.1f}s")


def test_2_sampler_degeneracy_streams():
    """beta 0/1 settings replay the pure samplers byte for byte, 10^4+ samples."""
    rng = np.random.default_rng(31)
    batches = [
        [Triple(int(rng.integers(40)), int(rng.integers(4)), int(rng.integers(40)))
         for _ in range(100)]
        for _ in range(101)   # 10100 samples
    ]

    def stream(strategy, **kw):
        sampler = Sampler(SamplerConfig(strategy=strategy, seed=77,
                                        epochs=len(batches), **kw), n_entities=40)
        out = []
        for epoch, batch in enumerate(batches):
            negs, _ = sampler.sample_batch(batch, epoch=epoch)
            out.extend(tuple(n.head) + (n.rel,) + tuple(n.tail) + (n.strategy_used,)
                       for n in negs)
        return pickle.dumps(out)

    normal = stream("normal")
    visual = stream("mans_v")
    assert len(pickle.loads(normal)) >= 10_000
    assert stream("mans_t", beta1=0.0) == normal
    assert stream("mans_h", beta2=0.0) == normal
    assert stream("mans_t", beta1=1.0) == visual
    assert stream("mans_h", beta2=1.0) == visual
    ok(2, "normal/visual degenerate streams byte-identical over 10100 samples")


def test_3_adaptive_proportion_oracle():
    """beta3 equals an independent scalar recomputation on 100 random batches."""
    rng = np.random.default_rng(55)

    def oracle_phi(params, table, triple, norm):
        h, r, t = triple
        W = [[float(v) for v in row] for row in params.W]
        feats = table.vectors
        def vis(e):
            return [sum(W[i][j] * float(feats[e][j]) for j in range(len(W[0])))
                    for i in range(len(W))]
        def dist(a, rv, b):
            u = [a[i] + rv[i] - b[i] for i in range(len(a))]
            if norm == "L1":
                return sum(abs(x) for x in u)
            return math.sqrt(sum(x * x for x in u))
        h_s = [float(v) for v in params.E_s[h]]
        t_s = [float(v) for v in params.E_s[t]]
        rv = [float(v) for v in params.R[r]]
        h_v, t_v = vis(h), vis(t)
        uni = -dist(h_s, rv, t_s) + -dist(h_v, rv, t_v)
        multi = -dist(h_s, rv, t_v) + -dist(h_v, rv, t_s)
        return 1 if multi < uni else 0

    for case in range(100):
        n_e = int(rng.integers(4, 16))
        d = int(rng.integers(1, 5))
        d_v = int(rng.integers(1, 6))
        norm = "L1" if rng.integers(2) else "L2"
        params = init_params(n_e, 3, d, d_v, seed=case)
        table = FeatureTable(rng.normal(size=(n_e, d_v)).astype(np.float32),
                             ["from-file"] * n_e)
        batch = [Triple(int(rng.integers(n_e)), int(rng.integers(3)), int(rng.integers(n_e)))
                 for _ in range(int(rng.integers(2, 9)))]
        _, beta3 = sample_batch_adaptive(batch, params, table, k=1, n_entities=n_e,
                                         norm=norm, rng=np.random.default_rng(0))
        expected = sum(oracle_phi(params, table, t, norm) for t in batch) / len(batch)
        assert beta3 == expected

    # boundary: aligned modalities make both halves equal, so phi must be 0
    params = init_params(4, 1, 2, 2, seed=9)
    params.W = np.eye(2, dtype=np.float32)
    table = FeatureTable(params.E_s.copy(), ["from-file"] * 4)
    batch = [Triple(0, 0, 1), Triple(2, 0, 3), Triple(3, 0, 0)]
    _, beta3 = sample_batch_adaptive(batch, params, table, k=1, n_entities=4,
                                     norm="L1", rng=np.random.default_rng(0))
    assert beta3 == 0.0
    ok(3, "beta3 equals the independent recomputation on 100 batches; boundary -> 0")


def test_4_filtered_ranking_oracle():
    """Engine metrics equal the exhaustive brute-force scorer exactly."""
    params, table, dataset = ranking_fixture()
    for split in ("valid", "test"):
        metrics, records = link_prediction(params, table, dataset.store,
                                           split=split, norm="L1", return_ranks=True)
        ranks, oracle = oracle_link_prediction(params, table, dataset.store, split, "L1")
        assert [rec[4] for rec in records] == ranks
        assert (metrics.mr, metrics.mrr, metrics.hits1, metrics.hits3, metrics.hits10) \
            == (oracle["mr"], oracle["mrr"], oracle["hits1"], oracle["hits3"], oracle["hits10"])
    test_ranks, _ = oracle_link_prediction(params, table, dataset.store, "test", "L1")
    assert 1.5 in test_ranks   # fractional mid-rank exercised
    ok(4, "link-prediction metrics equal the brute-force oracle exactly, "
          f"test ranks {test_ranks}")


def test_5_toy_training_sanity(toy):
    """50-entity KG, 200 epochs: valid MRR >= 0.30 for Normal and adaptive."""
    random_mrr = sum(1.0 / k for k in range(1, 51)) / 50
    assert random_mrr == pytest.approx(0.09, abs=0.001)

    started = time.perf_counter()
    results = {}
    for strategy in ("normal", "mans_a"):
        _, log, metrics = run_toy(toy, strategy, seed=0)
        results[strategy] = metrics
        assert metrics.mrr >= 0.30, f"{strategy} MRR {metrics.mrr:.3f}"
        assert all(rec.mean_loss >= 0 for rec in log)
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    ok(5, "valid MRR normal={:.3f}, mans_a={:.3f} vs random {:.3f} in {:.0f}s".format(
        results["normal"].mrr, results["mans_a"].mrr, random_mrr, elapsed))


def test_6_directional_tracking_dashboard(toy):
    """Soft gate: mean Hit@1 over 5 seeds, flagged when a strategy falls
    more than 0.05 below Normal."""
    seeds = range(5)
    means = {}
    for strategy in ("normal", "mans_h", "mans_a"):
        hits = [run_toy(toy, strategy, seed)[2].hits1 for seed in seeds]
        means[strategy] = float(np.mean(hits))
    lines = ["strategy    mean Hit@1 (5 seeds)   delta vs normal"]
    for strategy, mean in means.items():
        delta = mean - means["normal"]
        flag = "  << FLAG: > 0.05 below normal" if delta < -0.05 else ""
        lines.append(f"{strategy:<12}{mean:.3f}{delta:+26.3f}{flag}")
        if delta < -0.05:
            warnings.warn(f"{strategy} mean Hit@1 {mean:.3f} trails normal "
                          f"{means['normal']:.3f} by more than 0.05")
    print("\n" + "\n".join(lines))
    # the dashboard is informational; the hard floor is beating random rank-1 odds
    for strategy, mean in means.items():
        assert mean > 1 / 50
    ok(6, "dashboard reported: " + ", ".join(f"{s}={m:.3f}" for s, m in means.items()))


def test_7_loss_and_score_properties():
    """Score sign/zero conditions, exact decomposition, inactive-hinge zeros,
    and the renormalization bound."""
    rng = np.random.default_rng(7)
    for _ in range(300):
        h, r, t = rng.normal(size=(3, 5))
        for norm in ("L1", "L2"):
            v = f_transe(h, r, t, norm)
            assert v <= 0.0
            assert (v == 0.0) == bool(np.all(h + r - t == 0.0))
    assert f_transe([0.5, -1.0], [0.25, 1.5], [0.75, 0.5], "L2") == 0.0

    params = init_params(6, 2, 4, 3, seed=7)
    table = FeatureTable(rng.normal(size=(6, 3)).astype(np.float32), ["from-file"] * 6)
    for _ in range(200):
        parts = score_triple(params, table, full_view(int(rng.integers(6))),
                             int(rng.integers(2)), full_view(int(rng.integers(6))),
                             "L1" if rng.integers(2) else "L2")
        assert parts.total == parts.unimodal + parts.multimodal

    # a satisfied pair must contribute nothing to any accumulator
    wide = init_params(4, 1, 2, 2, seed=8)
    wide.E_s = np.array([[0.0, 0.0], [0.05, 0.0], [9.0, 9.0], [5.0, -5.0]],
                        dtype=np.float32)
    wide.R = np.array([[0.05, 0.0]], dtype=np.float32)
    wide.W = np.zeros((2, 2), dtype=np.float32)
    quiet_table = FeatureTable(np.zeros((4, 2), dtype=np.float32), ["from-file"] * 4)
    from mans.sampling import NegativeTriple
    neg = NegativeTriple(full_view(0), 0, full_view(2), "normal")
    buffer = compute_gradients(wide, quiet_table, Triple(0, 0, 1), neg,
                               gamma=1.0, norm="L1")
    assert buffer.is_empty()

    stretched = init_params(64, 2, 8, 2, seed=9)
    stretched.E_s = (stretched.E_s * 7).astype(np.float32)
    renormalize(stretched)
    norms = np.linalg.norm(stretched.E_s.astype(np.float64), axis=1)
    assert norms.max() <= 1 + 1e-7
    ok(7, "score sign/zero, exact decomposition, inactive-hinge zero gradient, "
          f"max row norm {norms.max():.9f}")


def test_8_training_determinism(toy, tmp_path):
    """Two identical runs produce bitwise-identical checkpoint files."""
    dataset, table = toy
    blobs = []
    for name in ("a", "b"):
        config = TrainConfig(embedding_dim=24, margin=4.0, learning_rate=0.01,
                             epochs=30, num_batches=10, norm="L1", seed=123,
                             sampler=SamplerConfig(strategy="mans_a", seed=123))
        params, _ = train(dataset, table, config)
        path = tmp_path / f"{name}.mmkc"
        save_checkpoint(params, path)
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1]
    ok(8, f"identical configs -> identical {len(blobs[0])}-byte checkpoints")


def test_9_triple_classification_oracle():
    """Hand-built confusion (TP=3, FP=1, FN=1, TN=3) and an end-to-end run
    that realizes it."""
    direct = confusion_metrics(tp=3, fp=1, fn=1, tn=3)
    assert (direct.accuracy, direct.precision, direct.recall, direct.f1) \
        == (0.75, 0.75, 0.75, 0.75)

    # cluster of three zero-valued entities + far-flung rest: cluster pairs
    # score 0, anything else far below; with a zeroed projection the visual
    # terms vanish. Seed 0 lands exactly one corruption back in the cluster.
    params = init_params(10, 1, 1, 1, seed=0)
    values = [0.0, 0.0, 0.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0]
    params.E_s = np.array([[v] for v in values], dtype=np.float32)
    params.R = np.array([[0.0]], dtype=np.float32)
    params.W = np.zeros((1, 1), dtype=np.float32)
    table = FeatureTable(np.zeros((10, 1), dtype=np.float32), ["from-file"] * 10)
    store = TripleStore(
        train=[Triple(0, 0, 1)],
        valid=[Triple(0, 0, 1), Triple(1, 0, 2)],
        test=[Triple(0, 0, 2), Triple(1, 0, 0), Triple(2, 0, 1), Triple(3, 0, 4)],
    )
    end_to_end = triple_classification(params, table, store, norm="L1", seed=0)
    assert (end_to_end.accuracy, end_to_end.precision,
            end_to_end.recall, end_to_end.f1) == (0.75, 0.75, 0.75, 0.75)
    ok(9, "P = R = F1 = Acc = 0.75 exactly, direct and end to end")
