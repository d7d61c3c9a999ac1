"""State files, report rounding and certificate digests."""

from __future__ import annotations

import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np

from .core import KNOWN_STATES, MultipartiteState, PureState, State, make_named_state
from .ensembles import Ensemble, RankOneMeasurement

SIGNIFICANT_DIGITS = 9


def _pairs(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _complex(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.shape[-1] != 2:
        raise ValueError("state data entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def state_to_dict(s: State) -> dict:
    if isinstance(s, PureState):
        kind, data = "pure", s.vector
    else:
        kind, data = "density", s.matrix
    return {"dims": list(s.dims), "labels": list(s.labels), "kind": kind, "data": _pairs(data)}


def state_from_dict(d: dict, name: str | None = None) -> State:
    try:
        dims, kind, data = tuple(int(x) for x in d["dims"]), d["kind"], d["data"]
    except KeyError as e:
        raise ValueError(f"state file is missing the field {e.args[0]!r}") from None
    labels = d.get("labels")
    labels = None if labels is None else tuple(labels)
    arr = _complex(data)
    if kind == "pure":
        return PureState(arr, dims, labels, name)
    if kind == "density":
        return MultipartiteState(arr, dims, labels, name)
    raise ValueError(f"unknown state kind {kind!r} (expected 'pure' or 'density')")


def save_state(s: State, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(s)) + "\n")


def load_state(path) -> State:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except OSError as e:
        raise ValueError(f"cannot read state file {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ValueError(f"state file {path} is not valid JSON: {e}") from None
    return state_from_dict(d, name=f"file:{path.name}")


def resolve_state(descriptor: str) -> State:
    """A path to a state file, or a named state such as ``ghz:4``."""
    if os.path.exists(descriptor) or descriptor.endswith(".json"):
        return load_state(descriptor)
    return make_named_state(descriptor)


def round_sig(x: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    if not math.isfinite(x) or x == 0:
        return float(x)
    return float(f"{x:.{digits - 1}e}")


def rounded(obj, digits: int = SIGNIFICANT_DIGITS):
    """Recursively round floats (and numpy scalars/arrays) for stable output."""
    if isinstance(obj, dict):
        return {k: rounded(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj), digits)
    return obj


def certificate_digest(cert, digits: int = SIGNIFICANT_DIGITS) -> str:
    """sha256 over the certificate arrays rounded to ``digits`` significant digits."""
    if isinstance(cert, Ensemble):
        parts = [np.asarray(cert.weights)] + [m.density().matrix for m in cert.members]
    elif isinstance(cert, RankOneMeasurement):
        parts = list(cert.operators)
    else:
        raise TypeError(f"unsupported certificate type {type(cert).__name__}")
    h = hashlib.sha256()
    for a in parts:
        a = np.asarray(a, dtype=complex)
        h.update(json.dumps(rounded(_pairs(a), digits)).encode())
    return h.hexdigest()


def dump_report(report: dict, path=None) -> str:
    text = json.dumps(rounded(report), indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


__all__ = ["KNOWN_STATES", "state_to_dict", "state_from_dict", "save_state", "load_state",
           "resolve_state", "round_sig", "rounded", "certificate_digest", "dump_report"]
