"""Acceptance: extractor output must round-trip through the engine's
feature loader with exact 32-bit equality."""

import numpy as np
import pytest

from mans.data import Vocab
from mans.features import FROM_FILE, XAVIER_FILLED, load_features

from mans_extractor.backbones import VectorFileBackbone
from mans_extractor.extract import extract


def test_10_round_trip_through_engine_loader(tmp_path):
    """3-entity manifest with known tiny vectors: zero loader errors, exact
    values, and the two-image entity stores the exact coordinate-wise mean."""
    u = np.array([1.0, 2.0, 3.0, 4.0], dtype=np.float32)
    w = np.array([3.0, 2.0, 1.0, 0.0], dtype=np.float32)
    bee = np.array([0.5, -0.5, 0.25, 8.0], dtype=np.float32)
    cat = np.array([0.0, 0.0, 1.0, -1.0], dtype=np.float32)

    paths = {}
    for name, vec in (("ant_1", u), ("ant_2", w), ("bee_1", bee), ("cat_1", cat)):
        p = tmp_path / f"{name}.txt"
        p.write_text(" ".join(repr(float(v)) for v in vec))
        paths[name] = str(p)
    images = {
        "ant": [paths["ant_1"], paths["ant_2"]],
        "bee": [paths["bee_1"]],
        "cat": [paths["cat_1"]],
    }
    out = tmp_path / "features.mmkf"
    stats = extract(images, out, 4, VectorFileBackbone(4))
    assert stats.entities_written == 3

    # 'dog' is absent from the manifest, so the engine must fill it
    vocab = Vocab(["ant", "bee", "cat", "dog"])
    table = load_features(out, vocab, d_v_expected=4, seed=3, embed_dim=2)

    assert np.array_equal(table.pooled_feature(0), (u.astype(np.float64) + w) / 2)
    assert np.array_equal(table.pooled_feature(0),
                          np.array([2.0, 2.0, 2.0, 2.0], dtype=np.float32))
    assert np.array_equal(table.pooled_feature(1), bee)
    assert np.array_equal(table.pooled_feature(2), cat)
    assert table.provenance == [FROM_FILE, FROM_FILE, FROM_FILE, XAVIER_FILLED]
    print("\nACCEPTANCE 10 PASS: extractor output loads with exact 32-bit "
          "equality; two-image entity pooled to the exact mean")
