"""Field files: a small self-describing binary format and a CSV variant.

Binary layout: ``MDSPDE-FIELD\\n``, little-endian uint64 header length, UTF-8
JSON header (shape, points, params, seed, method, settings, extra), then the
values as little-endian float64 in C order. CSV: one ``#``-prefixed JSON header
line, a column header ``i,y0,...``, then one row per time index.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .model import FieldSample, ModelParams

MAGIC = b"MDSPDE-FIELD\n"


def _header(sample: FieldSample, extra: dict[str, Any] | None) -> dict[str, Any]:
    return {
        "shape": list(sample.values.shape),
        "points": sample.points.tolist(),
        "params": None if sample.params is None else sample.params.to_dict(),
        "seed": sample.seed,
        "method": sample.method,
        "settings": sample.settings,
        "extra": extra or {},
    }


def _sample_from_header(values: np.ndarray, header: dict[str, Any]) -> FieldSample:
    params = None if header.get("params") is None else ModelParams.from_dict(header["params"])
    return FieldSample(values, np.asarray(header["points"], dtype=float), params, header.get("seed"),
                       header.get("method", "external"), header.get("settings", {}))


def save_field(sample: FieldSample, path: str | Path, fmt: str = "bin", extra: dict[str, Any] | None = None) -> Path:
    path = Path(path)
    header = _header(sample, extra)
    if fmt == "bin":
        blob = json.dumps(header, sort_keys=True).encode()
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)
            fh.write(np.ascontiguousarray(sample.values, dtype="<f8").tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
            fh.write(",".join(["i"] + [f"y{j}" for j in range(sample.m)]) + "\n")
            for i, row in enumerate(sample.values):
                fh.write(",".join([str(i)] + [repr(float(v)) for v in row]) + "\n")
    else:
        raise ValueError(f"unknown field format {fmt!r}")
    return path


def load_field(path: str | Path) -> tuple[FieldSample, dict[str, Any]]:
    """Read a field file written by :func:`save_field`; returns the sample and the header."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
        if head == MAGIC:
            (size,) = struct.unpack("<Q", fh.read(8))
            header = json.loads(fh.read(size).decode())
            values = np.frombuffer(fh.read(), dtype="<f8").reshape(header["shape"]).astype(float)
            return _sample_from_header(values, header), header
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path} is not a field file")
        header = json.loads(first[2:])
        fh.readline()
        values = np.loadtxt(fh, delimiter=",", ndmin=2)[:, 1:]
    return _sample_from_header(values.reshape(header["shape"]), header), header
