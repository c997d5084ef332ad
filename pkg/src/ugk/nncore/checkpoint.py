"""Binary checkpoints: magic 'UGK1', a JSON shape table, the little-endian
f64 parameter payload, then the Adam state buffers in the same order."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ShapeMismatch
from .optim import AdamState

MAGIC = b"UGK1"


def save_checkpoint(path, named_params, adam: AdamState | None = None,
                    config_digest: str = "", extra: dict | None = None):
    header = {
        "params": [[name, list(t.data.shape)] for name, t in named_params],
        "adam_t": adam.t if adam is not None else None,
        "config": config_digest,
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, t in named_params:
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())
        if adam is not None:
            for name, t in named_params:
                fh.write(np.ascontiguousarray(adam.m[name], dtype="<f8").tobytes())
            for name, t in named_params:
                fh.write(np.ascontiguousarray(adam.v[name], dtype="<f8").tobytes())


def load_checkpoint(path, named_params) -> dict:
    """Load parameter values in place; shapes must match the model.

    Returns the header dict (config digest, extras, adam step count); Adam
    buffers, when present, are returned under 'adam_state'.
    """
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ShapeMismatch("not a UGK1 checkpoint")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8:8 + hlen])
    offset = 8 + hlen

    expected = {name: tuple(t.data.shape) for name, t in named_params}
    stored = {name: tuple(shape) for name, shape in header["params"]}
    if expected != stored:
        raise ShapeMismatch("checkpoint shape table does not match the model config")

    def take(shape):
        nonlocal offset
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=n, offset=offset).reshape(shape)
        offset += 8 * n
        return arr.copy()

    for name, t in named_params:
        t.data = take(t.data.shape).astype(t.data.dtype)
        t.grad = np.zeros_like(t.data)

    if header.get("adam_t") is not None:
        adam = AdamState(t=header["adam_t"])
        for name, t in named_params:
            adam.m[name] = take(t.data.shape)
        for name, t in named_params:
            adam.v[name] = take(t.data.shape)
        header["adam_state"] = adam
    return header
