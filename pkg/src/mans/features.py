"""Per-entity visual feature vectors and the MMKF file format.

Feature files store one already-pooled vector per entity (the mean over
that entity's images, taken at extraction time). Entities missing from the
file are filled with seeded Xavier-uniform vectors so every entity id owns
exactly one vector.
"""

import struct

import numpy as np

from .exceptions import FeatureFormatError, UnknownEntityError

MMKF_MAGIC = b"MMKF"
MMKF_VERSION = 1

FROM_FILE = "from-file"
XAVIER_FILLED = "xavier-filled"


class FeatureTable:
    """Frozen feature vectors, one row per entity id."""

    def __init__(self, vectors, provenance):
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        self.provenance = list(provenance)
        if len(self.provenance) != self.vectors.shape[0]:
            raise ValueError("provenance length does not match vector count")

    @property
    def n_entities(self):
        return self.vectors.shape[0]

    @property
    def d_v(self):
        return self.vectors.shape[1]

    def pooled_feature(self, entity_id):
        """Stored mean-pooled vector for one entity; pure read."""
        if not 0 <= entity_id < self.n_entities:
            raise IndexError(f"entity id {entity_id} out of range [0, {self.n_entities})")
        return self.vectors[entity_id]


def pooled_feature(table, entity_id):
    return table.pooled_feature(entity_id)


def xavier_bound(fan_in, fan_out):
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def xavier_fill(n_entities, d_v, embed_dim, seed):
    """All-filled table: every vector Xavier-uniform from the seeded generator."""
    rng = np.random.default_rng(seed)
    bound = xavier_bound(d_v, embed_dim)
    vectors = rng.uniform(-bound, bound, size=(n_entities, d_v)).astype(np.float32)
    return FeatureTable(vectors, [XAVIER_FILLED] * n_entities)


def read_feature_file(path):
    """Read raw (name, vector) records; MMKF binary or TSV by extension."""
    if str(path).endswith(".tsv"):
        return _read_tsv(path)
    return _read_mmkf(path)


def _read_tsv(path):
    names, rows = [], []
    d_v = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            fields = stripped.split("\t")
            if len(fields) < 2:
                raise FeatureFormatError(f"{path}:{line_no}: expected name and values")
            if d_v is None:
                d_v = len(fields) - 1
            elif len(fields) - 1 != d_v:
                raise FeatureFormatError(
                    f"{path}:{line_no}: expected {d_v} values, got {len(fields) - 1}"
                )
            names.append(fields[0])
            rows.append(np.array([float(v) for v in fields[1:]], dtype=np.float32))
    return names, rows, d_v


def _read_mmkf(path):
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16 or header[:4] != MMKF_MAGIC:
            raise FeatureFormatError(f"{path}: not an MMKF file")
        version, count, d_v = struct.unpack("<III", header[4:16])
        if version != MMKF_VERSION:
            raise FeatureFormatError(f"{path}: unsupported MMKF version {version}")
        names, rows = [], []
        for _ in range(count):
            raw_len = fh.read(2)
            if len(raw_len) < 2:
                raise FeatureFormatError(f"{path}: truncated record header")
            (name_len,) = struct.unpack("<H", raw_len)
            name = fh.read(name_len)
            payload = fh.read(4 * d_v)
            if len(name) < name_len or len(payload) < 4 * d_v:
                raise FeatureFormatError(f"{path}: truncated record payload")
            names.append(name.decode("utf-8"))
            rows.append(np.frombuffer(payload, dtype="<f4").astype(np.float32))
        if fh.read(1):
            raise FeatureFormatError(f"{path}: trailing bytes after {count} records")
    return names, rows, d_v


def write_mmkf(path, records, d_v):
    """Write (name, vector) records as MMKF; vectors stored as binary32 LE."""
    records = list(records)
    with open(path, "wb") as fh:
        fh.write(MMKF_MAGIC)
        fh.write(struct.pack("<III", MMKF_VERSION, len(records), d_v))
        for name, vec in records:
            vec = np.asarray(vec, dtype="<f4")
            if vec.shape != (d_v,):
                raise FeatureFormatError(f"record {name!r} has shape {vec.shape}, want ({d_v},)")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(vec.tobytes())


def load_features(path, vocab, d_v_expected, seed, embed_dim):
    """Build the full per-entity table from a feature file.

    Entities present in the file keep their stored vectors; the rest are
    filled Xavier-uniform within ``±sqrt(6/(d_v+embed_dim))``, drawn from a
    generator seeded with ``seed`` in ascending entity-id order, so the
    table is independent of record order in the file and reproducible.
    """
    names, rows, d_v = read_feature_file(path)
    if d_v is None:
        d_v = d_v_expected
    if d_v != d_v_expected:
        raise FeatureFormatError(f"{path}: feature dim {d_v} != expected {d_v_expected}")

    unknown = [name for name in names if name not in vocab]
    if unknown:
        raise UnknownEntityError(unknown)

    n = len(vocab)
    vectors = np.zeros((n, d_v), dtype=np.float32)
    provenance = [XAVIER_FILLED] * n
    for name, vec in zip(names, rows):
        idx = vocab.id_of(name)
        vectors[idx] = vec
        provenance[idx] = FROM_FILE

    rng = np.random.default_rng(seed)
    bound = xavier_bound(d_v, embed_dim)
    for idx in range(n):
        if provenance[idx] == XAVIER_FILLED:
            vectors[idx] = rng.uniform(-bound, bound, size=d_v).astype(np.float32)
    return FeatureTable(vectors, provenance)
