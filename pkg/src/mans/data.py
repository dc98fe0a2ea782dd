"""Triple loading, vocabularies, and the known-triple filter index.

Datasets are plain TSV files, one ``head<TAB>relation<TAB>tail`` triple per
line. Vocabularies assign dense zero-based ids in first-appearance order
over the train, valid, and test files, so identical inputs always produce
identical ids.
"""

import warnings
from pathlib import Path
from typing import NamedTuple

from .exceptions import DatasetError, ParseError


class Triple(NamedTuple):
    head: int
    rel: int
    tail: int


class Vocab:
    """Bijective mapping between names and dense integer ids."""

    def __init__(self, names=()):
        self._names = []
        self._ids = {}
        for name in names:
            self.add(name)

    def add(self, name):
        """Return the id for ``name``, assigning the next id if new."""
        idx = self._ids.get(name)
        if idx is None:
            idx = len(self._names)
            self._ids[name] = idx
            self._names.append(name)
        return idx

    def id_of(self, name):
        return self._ids[name]

    def name_of(self, idx):
        return self._names[idx]

    def __contains__(self, name):
        return name in self._ids

    def __len__(self):
        return len(self._names)

    @property
    def names(self):
        return list(self._names)

    def to_tsv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for idx, name in enumerate(self._names):
                fh.write(f"{name}\t{idx}\n")

    @classmethod
    def from_tsv(cls, path):
        vocab = cls()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 2:
                    raise ParseError(path, line_no, f"expected 2 fields, got {len(fields)}")
                name, idx = fields
                if vocab.add(name) != int(idx):
                    raise ParseError(path, line_no, f"non-dense id {idx} for {name!r}")
        return vocab


class TripleStore:
    """Train/valid/test splits plus a membership index over their union.

    The filter index deduplicates across splits; the split lists keep
    duplicate lines so dataset statistics are preserved.
    """

    def __init__(self, train, valid, test):
        self.train = list(train)
        self.valid = list(valid)
        self.test = list(test)
        self.filter_index = frozenset(self.train) | frozenset(self.valid) | frozenset(self.test)

    def contains(self, triple):
        """True iff ``triple`` appears in any split."""
        return tuple(triple) in self.filter_index

    def __len__(self):
        return len(self.train) + len(self.valid) + len(self.test)

    @property
    def splits(self):
        return {"train": self.train, "valid": self.valid, "test": self.test}


class Dataset(NamedTuple):
    entities: Vocab
    relations: Vocab
    store: TripleStore


def contains(store, triple):
    return store.contains(triple)


def _parse_lines(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            fields = stripped.split("\t")
            if len(fields) != 3:
                raise ParseError(path, line_no, f"expected 3 tab-separated fields, got {len(fields)}")
            rows.append(tuple(fields))
    return rows


def load_dataset(train_path, valid_path, test_path, sidecar_dir=None):
    """Load the three splits and build vocabularies over all of them.

    Entities appearing only in valid/test still receive ids so they can be
    ranked; a warning reports how many were unseen in train. When
    ``sidecar_dir`` is given, ``entities.tsv`` and ``relations.tsv``
    (``name<TAB>id``) are written there for reproducibility.
    """
    raw = {
        "train": _parse_lines(train_path),
        "valid": _parse_lines(valid_path),
        "test": _parse_lines(test_path),
    }
    if not raw["train"]:
        raise DatasetError(f"train split {train_path} contains no triples")

    entities = Vocab()
    relations = Vocab()
    splits = {}
    for split in ("train", "valid", "test"):
        splits[split] = [
            Triple(entities.add(h), relations.add(r), entities.add(t))
            for h, r, t in raw[split]
        ]

    seen_in_train = set()
    for h, _, t in splits["train"]:
        seen_in_train.add(h)
        seen_in_train.add(t)
    unseen = len(entities) - len(seen_in_train)
    if unseen:
        warnings.warn(
            f"{unseen} entities appear only in valid/test, unseen in train",
            stacklevel=2,
        )

    if sidecar_dir is not None:
        sidecar = Path(sidecar_dir)
        sidecar.mkdir(parents=True, exist_ok=True)
        entities.to_tsv(sidecar / "entities.tsv")
        relations.to_tsv(sidecar / "relations.tsv")

    return Dataset(entities, relations, TripleStore(**splits))


def write_split(triples, entities, relations, path):
    """Write one split back to TSV with names resolved from the vocabularies."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h, r, t in triples:
            fh.write(f"{entities.name_of(h)}\t{relations.name_of(r)}\t{entities.name_of(t)}\n")


def write_dataset(dataset, directory):
    """Write all three splits to ``train.tsv``/``valid.tsv``/``test.tsv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for split, triples in dataset.store.splits.items():
        paths[split] = directory / f"{split}.tsv"
        write_split(triples, dataset.entities, dataset.relations, paths[split])
    return paths["train"], paths["valid"], paths["test"]
