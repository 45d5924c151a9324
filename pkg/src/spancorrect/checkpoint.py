"""Versioned JSON checkpoints holding config, vocabulary, and parameters.

Tensors are stored as base64-encoded little-endian float32 payloads, so a
checkpoint round-trips bit-exactly and contains no pickled code.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np
import torch

from .transformer import ModelConfig, SpanExtractor
from .vocab import Vocab

FORMAT_NAME = "spancorrect-checkpoint"
FORMAT_VERSION = 1


def save_checkpoint(
    path: str | Path,
    model: SpanExtractor,
    vocab: Vocab,
    kind: str = "reader",
) -> None:
    params = {}
    for name, tensor in model.state_dict().items():
        array = tensor.detach().cpu().numpy().astype("<f4")
        params[name] = {
            "shape": list(array.shape),
            "dtype": "float32",
            "data": base64.b64encode(array.tobytes()).decode("ascii"),
        }
    obj = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "model_config": model.config.to_dict(),
        "vocab": vocab.to_dict(),
        "parameters": params,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, sort_keys=True)
        f.write("\n")


def load_checkpoint(path: str | Path) -> tuple[SpanExtractor, Vocab, ModelConfig, str]:
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    if obj.get("format") != FORMAT_NAME:
        raise ValueError(f"{path}: not a {FORMAT_NAME} file")
    if obj.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {obj.get('version')!r}")
    config = ModelConfig.from_dict(obj["model_config"])
    vocab = Vocab.from_dict(obj["vocab"])
    model = SpanExtractor(config, len(vocab))
    state = {}
    for name, entry in obj["parameters"].items():
        raw = base64.b64decode(entry["data"])
        array = np.frombuffer(raw, dtype="<f4").reshape(entry["shape"]).copy()
        state[name] = torch.from_numpy(array)
    model.load_state_dict(state)
    model.eval()
    return model, vocab, config, obj.get("kind", "reader")
