"""Binary and CSV dataset files.

Dataset file layout (all integers and floats little-endian)::

    b"SAWD"                 magic
    uint16                  format version
    uint32                  manifest length in bytes
    manifest                UTF-8 JSON, sorted keys
    padding                 zero bytes up to a multiple of 8
    uint64 n, uint64 k_max
    n fixed-size records    see ``record_dtype``

Every record has the same size, so record ``i`` starts at
``header_size + i * record_dtype(k_max).itemsize`` and can be read without
touching the others.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .experiment import Dataset
from .vessel import DOFS

DATASET_MAGIC = b"SAWD"
DATASET_VERSION = 1


class DatasetFormatError(ValueError):
    pass


def record_dtype(k_max: int) -> np.dtype:
    return np.dtype([
        ("seed", "<u8"), ("h_s", "<f8"), ("t_1", "<f8"), ("mu_h", "<f8"), ("speed", "<f8"),
        ("m0", "<f8", (3,)), ("ordinates", "<f8", (3, k_max)), ("freqs", "<f8", (3, k_max)),
    ])


def _manifest_bytes(manifest: dict) -> bytes:
    return json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()


def dataset_to_bytes(ds: Dataset) -> bytes:
    manifest = _manifest_bytes(ds.manifest)
    head = DATASET_MAGIC + struct.pack("<HI", DATASET_VERSION, len(manifest)) + manifest
    head += b"\0" * (-len(head) % 8)
    head += struct.pack("<QQ", len(ds), ds.k_max)
    rec = np.zeros(len(ds), dtype=record_dtype(ds.k_max))
    rec["seed"] = ds.seeds
    for name in ("h_s", "t_1", "mu_h", "speed", "m0", "ordinates", "freqs"):
        rec[name] = getattr(ds, name)
    return head + rec.tobytes()


def dataset_from_bytes(data: bytes) -> Dataset:
    if data[:4] != DATASET_MAGIC:
        raise DatasetFormatError("bad magic bytes (not a SAWB dataset file)")
    try:
        version, mlen = struct.unpack_from("<HI", data, 4)
        if version != DATASET_VERSION:
            raise DatasetFormatError(f"unsupported dataset format version {version}")
        manifest = json.loads(data[10:10 + mlen].decode())
        pos = 10 + mlen
        pos += -pos % 8
        n, k_max = struct.unpack_from("<QQ", data, pos)
        pos += 16
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"corrupt dataset header: {exc}") from None
    dt = record_dtype(k_max)
    if len(data) - pos != n * dt.itemsize:
        raise DatasetFormatError(f"dataset body holds {len(data) - pos} bytes, expected {n * dt.itemsize}")
    rec = np.frombuffer(data, dtype=dt, count=n, offset=pos)
    return Dataset(
        h_s=rec["h_s"].astype(float), t_1=rec["t_1"].astype(float), mu_h=rec["mu_h"].astype(float),
        speed=rec["speed"].astype(float), seeds=rec["seed"].astype(np.uint64),
        ordinates=rec["ordinates"].astype(float), freqs=rec["freqs"].astype(float),
        m0=rec["m0"].astype(float), manifest=manifest,
    )


def save_dataset(ds: Dataset, path) -> Path:
    path = Path(path)
    path.write_bytes(dataset_to_bytes(ds))
    return path


def load_dataset(path) -> Dataset:
    return dataset_from_bytes(Path(path).read_bytes())


def write_dataset_csv(ds: Dataset, path) -> Path:
    """Human-readable export: one row per record, features at ``k_max``."""
    path = Path(path)
    k = ds.k_max
    header = ["index", "seed", "h_s", "t_1", "mu_h", "speed"] + [f"m0_{d}" for d in DOFS]
    for d in DOFS:
        header += [f"{d}_ord_{i}" for i in range(k)] + [f"{d}_freq_{i}" for i in range(k)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(ds)):
            row = [i, int(ds.seeds[i])] + [repr(float(v)) for v in
                                           (ds.h_s[i], ds.t_1[i], ds.mu_h[i], ds.speed[i], *ds.m0[i])]
            for j in range(len(DOFS)):
                row += [repr(float(v)) for v in ds.ordinates[i, j]] + [repr(float(v)) for v in ds.freqs[i, j]]
            w.writerow(row)
    return path
