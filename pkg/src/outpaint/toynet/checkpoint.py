"""Checkpoint and loss-log files.

A checkpoint is one line of JSON (architecture, seed, step, parameter
count) followed by the parameters as a little-endian float32 blob in
:meth:`ToyNetwork.parameters` order.  Loss logs are JSON lines.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .network import ToyNetwork, build_from_arch

MAGIC = "toynet-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(net: ToyNetwork, path, seed: int = 0, step: int = 0) -> None:
    flat = net.get_flat().astype("<f4")
    header = {"format": MAGIC, "version": VERSION, "arch": net.arch, "seed": int(seed),
              "step": int(step), "n_params": int(flat.size), "dtype": "<f4"}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(flat.tobytes())


def load_checkpoint(path) -> tuple[ToyNetwork, dict]:
    """Rebuild the network stored at *path*; returns ``(net, header)``."""
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise CheckpointError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl])
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header") from exc
    if not isinstance(header, dict) or header.get("format") != MAGIC:
        raise CheckpointError(f"{path}: not a toy network checkpoint")
    if header.get("version") != VERSION:
        raise CheckpointError(f"{path}: unsupported version {header.get('version')}")
    blob = raw[nl + 1:]
    n = header["n_params"]
    if len(blob) != 4 * n:
        raise CheckpointError(f"{path}: expected {4 * n} parameter bytes, found {len(blob)}")
    net = build_from_arch(header["arch"])
    if net.num_params() != n:
        raise CheckpointError(f"{path}: architecture has {net.num_params()} parameters, header says {n}")
    net.set_flat(np.frombuffer(blob, dtype="<f4").astype(np.float64))
    return net, header


def write_jsonl(records, path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def read_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
