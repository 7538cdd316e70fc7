"""Versioned checkpoint container: JSON header plus named binary blobs.

Layout: magic "WCK1", little-endian u32 header length, UTF-8 JSON header,
then the blob bytes back to back.  Networks serialize in the weight format
of the nn package; arrays as dtype/shape-prefixed raw buffers.  Checkpoint
ids are the SHA-256 of the full file bytes (content addressing).
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .nn import Mlp

MAGIC = b"WCK1"
FORMAT_VERSION = 1


def _array_to_bytes(arr):
    arr = np.asarray(arr)
    head = struct.pack("<II", {np.dtype("<f8"): 0, np.dtype("<i8"): 1}[arr.dtype.newbyteorder("<")], arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
    return head + dims + arr.astype(arr.dtype.newbyteorder("<")).tobytes()


def _array_from_bytes(blob):
    code, ndim = struct.unpack_from("<II", blob, 0)
    dtype = {0: "<f8", 1: "<i8"}[code]
    shape = struct.unpack_from(f"<{ndim}I", blob, 8) if ndim else ()
    data = np.frombuffer(blob, dtype=dtype, offset=8 + 4 * ndim)
    return data.reshape(shape).copy()


class Checkpoint:
    """Named weight blobs plus metadata, content-addressed on disk."""

    def __init__(self, tag, skeleton_hash="", prompt="", total_steps=0,
                 best_reward=0.0, config=None):
        self.tag = tag
        self.skeleton_hash = skeleton_hash
        self.prompt = prompt
        self.total_steps = int(total_steps)
        self.best_reward = float(best_reward)
        self.config = config or {}
        self._networks = {}
        self._arrays = {}

    def put_network(self, name, mlp):
        self._networks[name] = mlp.to_bytes()

    def put_array(self, name, arr):
        self._arrays[name] = _array_to_bytes(arr)

    def get_network(self, name, activation="tanh"):
        return Mlp.from_bytes(self._networks[name], activation=activation)

    def get_array(self, name):
        return _array_from_bytes(self._arrays[name])

    def has(self, name):
        return name in self._networks or name in self._arrays

    def component_names(self):
        return sorted(self._networks) + sorted(self._arrays)

    # -- serialization --------------------------------------------------------

    def to_bytes(self):
        blobs = []
        index = []
        offset = 0
        for kind, table in (("mlp", self._networks), ("array", self._arrays)):
            for name in sorted(table):
                blob = table[name]
                index.append(
                    {"name": name, "kind": kind, "offset": offset, "length": len(blob)}
                )
                blobs.append(blob)
                offset += len(blob)
        header = {
            "format_version": FORMAT_VERSION,
            "tag": self.tag,
            "components": index,
            "skeleton_hash": self.skeleton_hash,
            "prompt": self.prompt,
            "total_steps": self.total_steps,
            "best_reward": self.best_reward,
            "config": self.config,
        }
        head = json.dumps(header, sort_keys=True).encode()
        return MAGIC + struct.pack("<I", len(head)) + head + b"".join(blobs)

    @classmethod
    def from_bytes(cls, data):
        if data[:4] != MAGIC:
            raise ValueError("not a checkpoint file (bad magic)")
        (hlen,) = struct.unpack_from("<I", data, 4)
        header = json.loads(data[8 : 8 + hlen].decode())
        if header.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header.get('format_version')}")
        ck = cls(
            tag=header["tag"],
            skeleton_hash=header.get("skeleton_hash", ""),
            prompt=header.get("prompt", ""),
            total_steps=header.get("total_steps", 0),
            best_reward=header.get("best_reward", 0.0),
            config=header.get("config", {}),
        )
        base = 8 + hlen
        for comp in header["components"]:
            blob = data[base + comp["offset"] : base + comp["offset"] + comp["length"]]
            if comp["kind"] == "mlp":
                ck._networks[comp["name"]] = blob
            else:
                ck._arrays[comp["name"]] = blob
        return ck

    def save(self, path):
        data = self.to_bytes()
        Path(path).write_bytes(data)
        return checkpoint_id(data)

    @classmethod
    def load(cls, path):
        return cls.from_bytes(Path(path).read_bytes())


def checkpoint_id(data):
    """Content-addressed id of checkpoint bytes."""
    return hashlib.sha256(data).hexdigest()
