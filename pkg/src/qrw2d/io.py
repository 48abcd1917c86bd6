"""Deterministic writers: CSV tables, 16-bit PGM images and JSON reports."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

LOG_FLOOR = 1e-16


def fmt(x) -> str:
    """Shortest round-trip decimal for a float, plain str for ints."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(obj) -> str:
    # json uses repr for floats, which is the shortest round-trip form
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False) + "\n"


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# --------------------------------------------------------------------------
# CSV

def profile_csv(prob: np.ndarray, threshold: float = LOG_FLOOR) -> str:
    """Rows ``r,s,p`` for sites with p > threshold, r major then s, both ascending."""
    n = (prob.shape[0] - 1) // 2
    lines = ["r,s,p"]
    ii, jj = np.nonzero(prob > threshold)
    for i, j in zip(ii, jj):
        lines.append(f"{i - n},{j - n},{fmt(prob[i, j])}")
    return "\n".join(lines) + "\n"


def cloud_csv(cloud) -> str:
    lines = ["alpha,beta,sheet,gamma,v1,v2,K"]
    for k in range(len(cloud)):
        lines.append(",".join([
            fmt(cloud.alpha[k]), fmt(cloud.beta[k]), str(int(cloud.sheet[k])),
            fmt(cloud.gamma[k]), fmt(cloud.velocity[k, 0]), fmt(cloud.velocity[k, 1]),
            fmt(cloud.curvature[k]),
        ]))
    return "\n".join(lines) + "\n"


def read_csv_rows(path: str | Path) -> list[dict[str, str]]:
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    return [dict(zip(header, line.split(","))) for line in text[1:]]


# --------------------------------------------------------------------------
# PGM

def scale_image(values: np.ndarray, scale: str = "log") -> np.ndarray:
    """Map nonnegative values to uint16 gray levels.

    ``log``: 65535 * (log10 p - log10 pmin) / (log10 pmax - log10 pmin) with
    pmin floored at 1e-16.  ``linear``: 65535 * p / pmax.
    """
    values = np.asarray(values, dtype=float)
    if scale == "linear":
        top = values.max() if values.size else 0.0
        if top <= 0:
            return np.zeros(values.shape, dtype=np.uint16)
        return np.clip(np.rint(65535.0 * values / top), 0, 65535).astype(np.uint16)
    if scale != "log":
        raise ValueError(f"unknown scale {scale!r}")
    floored = np.maximum(values, LOG_FLOOR)
    lo = math.log10(max(float(floored.min()), LOG_FLOOR))
    hi = math.log10(float(floored.max()))
    if hi <= lo:
        return np.where(values > LOG_FLOOR, 65535, 0).astype(np.uint16)
    pix = 65535.0 * (np.log10(floored) - lo) / (hi - lo)
    return np.clip(np.rint(pix), 0, 65535).astype(np.uint16)


def lattice_to_image(prob: np.ndarray) -> np.ndarray:
    """Array [r, s] -> image rows with s descending and columns with r ascending."""
    return np.ascontiguousarray(prob.T[::-1, :])


def pgm_bytes(image: np.ndarray) -> bytes:
    """Binary P5 PGM, maxval 65535, big-endian samples."""
    image = np.asarray(image, dtype=np.uint16)
    h, w = image.shape
    header = f"P5\n{w} {h}\n65535\n".encode("ascii")
    return header + image.astype(">u2").tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    if maxval != 65535:
        raise ValueError("expected 16-bit PGM")
    return np.frombuffer(parts[3], dtype=">u2").reshape(h, w).astype(np.uint16)


def density_image(velocity: np.ndarray, size: int, bin_kernel) -> np.ndarray:
    """Counts of Gauss-image points per pixel over [-1, 1]^2, rows with v2 descending."""
    # keep v = 1 in the last pixel instead of dropping it
    v = np.minimum(np.asarray(velocity, dtype=float), np.nextafter(1.0, 0.0))
    counts = bin_kernel(v[:, 0], v[:, 1], -1.0, 1.0, size)
    return counts[::-1, :]


def density_gray(counts: np.ndarray, scale: str = "log") -> np.ndarray:
    """Dots-on-white rendering: more points per pixel is darker, empty pixels are white."""
    counts = np.asarray(counts, dtype=float)
    values = np.log1p(counts) if scale == "log" else counts
    return (65535 - scale_image(values, "linear")).astype(np.uint16)
