import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mans.data import write_dataset
from mans.features import write_mmkf
from toykg import make_toy_kg


@pytest.fixture(scope="session")
def disk_dataset(tmp_path_factory):
    """Small on-disk dataset: TSV splits, MMKF features, base config file."""
    root = tmp_path_factory.mktemp("toydata")
    dataset, table = make_toy_kg(n_entities=15, n_relations=2, d_v=4, seed=21)
    write_dataset(dataset, root)
    records = [(dataset.entities.name_of(e), table.vectors[e])
               for e in range(table.n_entities)]
    write_mmkf(root / "features.mmkf", records, d_v=4)
    config = root / "base.cfg"
    config.write_text(
        f"train_path = {root / 'train.tsv'}\n"
        f"valid_path = {root / 'valid.tsv'}\n"
        f"test_path = {root / 'test.tsv'}\n"
        f"features_path = {root / 'features.mmkf'}\n"
        "embedding_dim = 8\n"
        "feature_dim = 4\n"
        "epochs = 4\n"
        "num_batches = 4\n"
        "margin = 2.0\n"
        "learning_rate = 0.05\n"
        "seed = 13\n"
        "checkpoint_every = 2\n"
    )
    return root
