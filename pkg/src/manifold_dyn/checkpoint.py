"""Checkpoint persistence: the unit of exchange between train and analyze.

Parameter arrays are stored as base64-encoded little-endian float64 with
explicit shape metadata, inside a versioned JSON envelope.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1


def _encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "shape": list(arr.shape),
        "dtype": "<f8",
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def _decode_array(doc: dict) -> np.ndarray:
    raw = base64.b64decode(doc["data"])
    return np.frombuffer(raw, dtype=doc["dtype"]).reshape(doc["shape"]).copy()


@dataclass
class Checkpoint:
    task_id: str
    seed: int
    hyperparameters: dict
    init_params: dict
    final_params: dict
    loss_history: list  # of dicts {iteration, loss, wall_time}
    usable: bool = True
    meta: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def save(self, path) -> str:
        # wall times stay in the CSV sidecar; the checkpoint itself must be
        # byte-identical across reruns of the same seeded invocation
        doc = {
            "schema_version": self.schema_version,
            "task_id": self.task_id,
            "seed": self.seed,
            "hyperparameters": self.hyperparameters,
            "usable": self.usable,
            "meta": self.meta,
            "init_params": {k: _encode_array(v) for k, v in self.init_params.items()},
            "final_params": {k: _encode_array(v) for k, v in self.final_params.items()},
            "loss_history": [{"iteration": r["iteration"], "loss": r["loss"]}
                             for r in self.loss_history],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)
        return str(path)

    @staticmethod
    def load(path) -> "Checkpoint":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"checkpoint file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"checkpoint {path} is not valid JSON: {exc}")
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(
                f"checkpoint schema_version {doc.get('schema_version')} "
                f"unsupported (expected {SCHEMA_VERSION})")
        return Checkpoint(
            task_id=doc["task_id"],
            seed=doc["seed"],
            hyperparameters=doc["hyperparameters"],
            init_params={k: _decode_array(v) for k, v in doc["init_params"].items()},
            final_params={k: _decode_array(v) for k, v in doc["final_params"].items()},
            loss_history=doc["loss_history"],
            usable=doc.get("usable", True),
            meta=doc.get("meta", {}),
        )

    def loss_history_csv(self, path) -> str:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "loss", "wall_time"])
            for rec in self.loss_history:
                writer.writerow([rec["iteration"], repr(rec["loss"]),
                                 rec.get("wall_time", "")])
        return str(path)
