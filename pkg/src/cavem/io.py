"""CSV/JSON writers shared by the pipelines and the CLI.

Floats are written with repr-level precision so that reruns with the same
seed produce byte-identical files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)}")


def write_spectrum_csv(path, frequencies, reflection) -> None:
    """Reflection trace columns: frequency_Hz, re_r, im_r, abs_r, arg_r."""
    rows = zip(
        frequencies,
        reflection.real,
        reflection.imag,
        np.abs(reflection),
        np.angle(reflection),
    )
    write_csv(path, ["frequency_Hz", "re_r", "im_r", "abs_r", "arg_r"], rows)


def default_output_dir() -> Path:
    """Output directory root; overridable via CAVEM_OUTPUT_DIR."""
    return Path(os.environ.get("CAVEM_OUTPUT_DIR", "cavem-results"))
