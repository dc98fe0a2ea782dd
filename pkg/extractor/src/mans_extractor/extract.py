"""Per-entity feature extraction and pooling."""

import warnings
from dataclasses import dataclass

import numpy as np

from .mmkf import write_mmkf_atomic


@dataclass
class ExtractStats:
    entities_written: int
    images_used: int
    images_skipped: int
    entities_omitted: int


def pool_entity(vectors):
    """Arithmetic mean of an entity's image features, accumulated in
    float64 and stored as float32."""
    stacked = np.stack([np.asarray(v, dtype=np.float64) for v in vectors])
    return (stacked.sum(axis=0) / len(vectors)).astype(np.float32)


def extract(images, output_path, d_v, backbone, batch_size=32):
    """Encode every manifest image, mean-pool per entity, write MMKF.

    Unreadable images are skipped with a warning; entities whose images
    are all unreadable are omitted entirely (the engine fills them).
    Records are sorted by entity name, so output is independent of
    manifest row order.
    """
    records = []
    used = skipped = omitted = 0
    for entity in sorted(images):
        paths = images[entity]
        vectors = []
        for start in range(0, len(paths), batch_size):
            chunk = paths[start: start + batch_size]
            for path, vec in zip(chunk, backbone.encode_batch(chunk)):
                if vec is None:
                    skipped += 1
                    warnings.warn(f"skipping unreadable image {path} for {entity}",
                                  stacklevel=2)
                else:
                    vectors.append(vec)
        if not vectors:
            omitted += 1
            continue
        used += len(vectors)
        records.append((entity, pool_entity(vectors)))
    write_mmkf_atomic(output_path, records, d_v)
    return ExtractStats(
        entities_written=len(records),
        images_used=used,
        images_skipped=skipped,
        entities_omitted=omitted,
    )
