"""Binary checkpoint format.

All integers and floats are little-endian::

    8s   magic  b"COGNNCKP"
    u32  format version (1)
    u32  n, then n bytes of UTF-8 JSON holding the ModelSpec fields
    32s  SHA-256 digest of the training configuration
    u32  epoch of the stored (best) parameters
    f64  best loss
    u64  root seed
    u32  parameter count, then per parameter:
         u16 name length, name (UTF-8), u32 ndim, ndim x u32 dims,
         prod(dims) x f64 values in row-major order
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import CoGNN, ModelSpec

MAGIC = b"COGNNCKP"
VERSION = 1


class CheckpointError(ValueError):
    pass


def config_digest(config: dict) -> bytes:
    return hashlib.sha256(json.dumps(config, sort_keys=True, default=str).encode()).digest()


@dataclass
class Checkpoint:
    spec: ModelSpec
    params: dict
    config_hash: bytes
    epoch: int
    best_loss: float
    root_seed: int

    def model(self) -> CoGNN:
        model = CoGNN(self.spec, seed=0)
        model.load_state_dict(self.params)
        return model

    def save(self, path) -> None:
        spec = json.dumps(self.spec.to_dict(), sort_keys=True).encode()
        out = bytearray()
        out += struct.pack("<8sII", MAGIC, VERSION, len(spec)) + spec
        out += struct.pack("<32sIdQI", self.config_hash.ljust(32, b"\0")[:32], self.epoch, self.best_loss,
                           self.root_seed, len(self.params))
        for name, value in self.params.items():
            value = np.ascontiguousarray(value, dtype="<f8")
            raw = name.encode()
            out += struct.pack("<H", len(raw)) + raw
            out += struct.pack(f"<I{value.ndim}I", value.ndim, *value.shape)
            out += value.tobytes()
        Path(path).write_bytes(bytes(out))

    @classmethod
    def load(cls, path) -> "Checkpoint":
        raw = Path(path).read_bytes()
        if len(raw) < 16 or raw[:8] != MAGIC:
            raise CheckpointError(f"{path}: bad magic bytes")
        _, version, n = struct.unpack_from("<8sII", raw, 0)
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        pos = 16
        spec = ModelSpec(**json.loads(raw[pos:pos + n].decode()))
        pos += n
        digest, epoch, best, seed, count = struct.unpack_from("<32sIdQI", raw, pos)
        pos += struct.calcsize("<32sIdQI")
        params = {}
        for _ in range(count):
            (length,) = struct.unpack_from("<H", raw, pos)
            pos += 2
            name = raw[pos:pos + length].decode()
            pos += length
            (ndim,) = struct.unpack_from("<I", raw, pos)
            pos += 4
            shape = struct.unpack_from(f"<{ndim}I", raw, pos)
            pos += 4 * ndim
            size = int(np.prod(shape))
            params[name] = np.frombuffer(raw, dtype="<f8", count=size, offset=pos).reshape(shape).astype(np.float64)
            pos += 8 * size
        return cls(spec, params, digest, epoch, best, seed)
