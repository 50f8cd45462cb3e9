"""Versioned model checkpoints: named tensors + optimizer state + config hash."""

from __future__ import annotations

import json

import numpy as np

FORMAT_VERSION = 1


def save_checkpoint(path, parameters, config_hash: str,
                    adam_state: dict | None = None):
    arrays = {}
    names = []
    for i, p in enumerate(parameters):
        arrays[f"param_{i}"] = p.value
        names.append(p.name)
    meta = {
        "format_version": FORMAT_VERSION,
        "config_hash": config_hash,
        "param_names": names,
    }
    if adam_state is not None:
        meta["adam"] = {k: adam_state[k]
                        for k in ("t", "lr", "beta1", "beta2", "eps")}
        for i, m in enumerate(adam_state["m"]):
            arrays[f"adam_m_{i}"] = m
        for i, v in enumerate(adam_state["v"]):
            arrays[f"adam_v_{i}"] = v
    arrays["__meta__"] = np.frombuffer(
        json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_checkpoint(path, parameters):
    """Restore parameter values in place; returns (meta, adam_state or None)."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta["format_version"] != FORMAT_VERSION:
            raise ValueError(
                f"unsupported checkpoint version {meta['format_version']}")
        names = meta["param_names"]
        if len(names) != len(parameters):
            raise ValueError(
                f"checkpoint has {len(names)} tensors, model has "
                f"{len(parameters)}")
        for i, p in enumerate(parameters):
            value = data[f"param_{i}"]
            if value.shape != p.value.shape:
                raise ValueError(
                    f"shape mismatch for {p.name}: checkpoint "
                    f"{value.shape} vs model {p.value.shape}")
            p.value[...] = value
        adam_state = None
        if "adam" in meta:
            adam_state = dict(meta["adam"])
            adam_state["m"] = [data[f"adam_m_{i}"] for i in range(len(names))]
            adam_state["v"] = [data[f"adam_v_{i}"] for i in range(len(names))]
    return meta, adam_state
