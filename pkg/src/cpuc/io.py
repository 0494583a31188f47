"""JSON formats for channels, ensembles, states and Gaussian channel parameters.

Complex numbers are two-element arrays ``[re, im]``; matrices are
row-major lists of rows.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .capacity import Ensemble
from .channels import KrausChannel
from .core import DensityMatrix, ValidationError
from .gaussian import FiducialChannel


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"malformed matrix: {e}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError(f"matrix must be rows of [re, im] pairs, got array of shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_json(ch: KrausChannel) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "kraus": [matrix_to_json(k) for k in ch.kraus_ops]}


def channel_from_json(data: dict) -> KrausChannel:
    try:
        ops = [matrix_from_json(k) for k in data["kraus"]]
        dim_in, dim_out = int(data["dim_in"]), int(data["dim_out"])
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed channel: missing or invalid {e}") from None
    ch = KrausChannel(ops)
    if (ch.dim_in, ch.dim_out) != (dim_in, dim_out):
        raise ValidationError(
            f"declared dims ({dim_in}, {dim_out}) do not match Kraus shape ({ch.dim_in}, {ch.dim_out})"
        )
    return ch


def ensemble_to_json(ens: Ensemble) -> dict:
    return {
        "dim": ens.dim,
        "symbols": [
            {"prior": float(p), "cost": float(c), "state": matrix_to_json(s.matrix)}
            for p, c, s in zip(ens.priors, ens.costs, ens.states)
        ],
    }


def ensemble_from_json(data: dict) -> Ensemble:
    try:
        dim = int(data["dim"])
        symbols = data["symbols"]
        priors = [float(s["prior"]) for s in symbols]
        costs = [float(s.get("cost", 0.0)) for s in symbols]
        states = [DensityMatrix(matrix_from_json(s["state"])) for s in symbols]
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed ensemble: missing or invalid {e}") from None
    if any(s.dim != dim for s in states):
        raise ValidationError(f"ensemble states do not match declared dim {dim}")
    return Ensemble(np.array(priors), tuple(states), np.array(costs))


def gaussian_channel_to_json(ch: FiducialChannel) -> dict:
    return {"eta": ch.eta, "n_tilde": ch.n_tilde, "omega_tilde": ch.omega_tilde}


def gaussian_channel_from_json(data: dict) -> FiducialChannel:
    try:
        return FiducialChannel(float(data["eta"]), float(data.get("n_tilde", 0.0)), float(data.get("omega_tilde", 1.0)))
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed Gaussian channel: missing or invalid {e}") from None


def _read(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON ({e})") from None


def _write(path, data: dict):
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def load_channel(path) -> KrausChannel:
    return channel_from_json(_read(path))


def save_channel(path, ch: KrausChannel):
    _write(path, channel_to_json(ch))


def load_ensemble(path) -> Ensemble:
    return ensemble_from_json(_read(path))


def save_ensemble(path, ens: Ensemble):
    _write(path, ensemble_to_json(ens))


def load_state(path) -> DensityMatrix:
    """A bare matrix, or an object with a ``"state"`` entry."""
    data = _read(path)
    if isinstance(data, dict):
        data = data.get("state")
    return DensityMatrix(matrix_from_json(data))


def save_state(path, rho):
    _write(path, {"state": matrix_to_json(np.asarray(rho))})


def load_gaussian_channel(path) -> FiducialChannel:
    return gaussian_channel_from_json(_read(path))


def load_state_matrix(path) -> np.ndarray:
    """A Hermitian matrix (e.g. a cost observable), not required to be a state."""
    data = _read(path)
    if isinstance(data, dict):
        data = data.get("matrix", data.get("state"))
    return matrix_from_json(data)
