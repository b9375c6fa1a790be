"""Checkpoint file format: weights plus the provenance chain that made them.

Layout: magic `NCKP`, u16 format version, u32 header length, JSON header,
then the packed tensor region. The header carries the model config, a tensor
table (name, shape, byte offset into the region), the append-only provenance
list, and a sha256 checksum of the tensor region. Tensor data is 32-bit
little-endian float, concatenated in named_tensors() order. Files are written
atomically (temp + rename).
"""

import hashlib
import json
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from . import nn

MAGIC = b"NCKP"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable, corrupted, or incompatible checkpoint file."""


@dataclass
class Checkpoint:
    config: nn.ModelConfig
    params: nn.ModelParams
    provenance: list  # [{"subset", "epochs", "seed", "data_hash"}, ...]


def save_checkpoint(params, provenance, path):
    """Serialize params + provenance; load(save(x)) is bit-identical for f32."""
    tensors = params.named_tensors()
    table = []
    blobs = []
    offset = 0
    for name, arr in tensors:
        blob = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        table.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(blob)
        offset += len(blob)
    region = b"".join(blobs)
    header = {
        "config": params.config.to_dict(),
        "tensors": table,
        "provenance": list(provenance),
        "checksum": hashlib.sha256(region).hexdigest(),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = (MAGIC + struct.pack("<H", FORMAT_VERSION)
               + struct.pack("<I", len(header_bytes)) + header_bytes + region)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_checkpoint(path, expected_config=None):
    """Read and verify a checkpoint; optionally enforce a model config."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 10 or raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version = struct.unpack("<H", raw[4:6])[0]
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {version}, "
            f"expected {FORMAT_VERSION}")
    header_len = struct.unpack("<I", raw[6:10])[0]
    if len(raw) < 10 + header_len:
        raise CheckpointError(f"{path}: truncated header")
    header = json.loads(raw[10:10 + header_len].decode("utf-8"))
    region = raw[10 + header_len:]
    if hashlib.sha256(region).hexdigest() != header["checksum"]:
        raise CheckpointError(f"{path}: tensor region checksum failure")

    config = nn.ModelConfig.from_dict(header["config"])
    if expected_config is not None and config != expected_config:
        raise CheckpointError(
            f"{path}: checkpoint config {config.to_dict()} does not match "
            f"the requested model config")

    # Rebuild the parameter structure the config implies, then fill by name.
    params = nn.init_params(config, np.random.Generator(np.random.PCG64(0)))
    wanted = dict(params.named_tensors())
    table = {entry["name"]: entry for entry in header["tensors"]}
    if set(table) != set(wanted):
        raise CheckpointError(
            f"{path}: tensor table does not match config "
            f"(missing {sorted(set(wanted) - set(table))}, "
            f"unexpected {sorted(set(table) - set(wanted))})")
    for name, arr in wanted.items():
        entry = table[name]
        if list(arr.shape) != entry["shape"]:
            raise CheckpointError(
                f"{path}: tensor {name} has shape {entry['shape']}, "
                f"config requires {list(arr.shape)}")
        start = entry["offset"]
        end = start + arr.size * 4
        if end > len(region):
            raise CheckpointError(f"{path}: truncated tensor region at {name}")
        arr[...] = np.frombuffer(region[start:end], dtype="<f4").reshape(arr.shape)
    return Checkpoint(config, params, header["provenance"])
