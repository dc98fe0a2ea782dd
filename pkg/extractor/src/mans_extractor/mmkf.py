"""Writer for the MMKF feature-file format consumed by the engine.

Layout (little-endian): magic ``MMKF``, version u32 = 1, record count u32,
feature dimension u32, then per record a u16 name length, the UTF-8 name,
and ``d_v`` IEEE-754 binary32 values.
"""

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"MMKF"
VERSION = 1


def write_mmkf_atomic(path, records, d_v):
    """Write records to ``path`` via a temp file and rename, so readers
    never observe a half-written file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = list(records)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<III", VERSION, len(records), d_v))
            for name, vec in records:
                vec = np.asarray(vec, dtype="<f4")
                if vec.shape != (d_v,):
                    raise ValueError(f"record {name!r} has shape {vec.shape}, want ({d_v},)")
                encoded = name.encode("utf-8")
                fh.write(struct.pack("<H", len(encoded)))
                fh.write(encoded)
                fh.write(vec.tobytes())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path
