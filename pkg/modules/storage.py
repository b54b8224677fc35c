"""
Storage module - experiment artifacts on disk.
CSV tables go through pandas, records through json; floats are written
with their shortest round-trip representation.
"""
import json
import os

import numpy as np
import pandas as pd

from modules.errors import InvalidInputError, OutputError


def ensure_output_dir(path):
    """Creates the output directory and checks it is writable."""
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create output directory {path}: {e}") from e
    if not os.access(path, os.W_OK):
        raise OutputError(f"output directory {path} is not writable")
    return path


def _to_builtin(value):
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_to_builtin(data), f, indent=2)
        f.write("\n")
    return path


def write_table(path, columns):
    """Writes a dict of equally long columns as CSV, keeping column order."""
    pd.DataFrame(columns).to_csv(path, index=False)
    return path


def write_pattern(path, pattern):
    return write_table(path, {
        "theta_deg": pattern.theta_deg,
        "af_linear": pattern.af_linear,
        "af_db": pattern.af_db,
    })


def write_mask(path, mask):
    return write_table(path, {"theta_deg": mask.theta_deg, "afd_db": mask.afd_db})


def write_convergence(path, history):
    return write_table(path, {
        "iteration": np.arange(len(history)),
        "best_fitness": np.asarray(history, dtype=float),
    })


def write_best_vector(path, amplitudes):
    return write_json(path, {"amplitudes": [float(a) for a in amplitudes]})


def load_best_vector(path):
    """Reads the amplitudes array written by write_best_vector."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"cannot read best vector from {path}: {e}") from e
    amplitudes = data.get("amplitudes") if isinstance(data, dict) else None
    if not isinstance(amplitudes, list) or not amplitudes:
        raise InvalidInputError(f"{path} has no 'amplitudes' array")
    return np.asarray(amplitudes, dtype=float)
