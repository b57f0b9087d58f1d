"""Raw binary arrays with JSON sidecars, and plot-ready CSV files.

An array ``name.bin`` holds little-endian float64 values in C order
(complex values as interleaved real/imag pairs). ``name.bin.json``
records dtype ("f64" or "c128"), shape, axis names and units, a
provenance tag and the SHA-256 of the raw bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

DTYPES = {"f64": np.dtype("<f8"), "c128": np.dtype("<c16")}
CSV_KINDS = ("wavefunction_snapshots", "potential_compare", "correlation_set", "leaderboard", "fidelity")


class ArrayFileError(ValueError):
    """A stored array does not match its sidecar."""


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def store_array(path, values, axes=(), units=(), provenance: str = "", extra: dict | None = None) -> dict:
    """Write ``values`` and its sidecar; returns the metadata written."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        tag = "c128"
    elif values.dtype.kind in "fiub":
        tag = "f64"
    else:
        raise TypeError(f"cannot store arrays of dtype {values.dtype}")
    raw = np.ascontiguousarray(values, dtype=DTYPES[tag]).tobytes()
    axes = list(axes) or [f"axis{i}" for i in range(values.ndim)]
    units = list(units) or [""] * values.ndim
    if len(axes) != values.ndim or len(units) != values.ndim:
        raise ValueError("need one axis name and one unit per dimension")
    meta = {
        "dtype": tag,
        "shape": list(values.shape),
        "axes": axes,
        "units": units,
        "provenance": provenance,
        "sha256": hashlib.sha256(raw).hexdigest(),
    }
    if extra:
        meta["extra"] = extra
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(raw)
    sidecar_path(path).write_text(json.dumps(meta, indent=2), encoding="utf-8")
    return meta


def load_array(path, verify: bool = True) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    raw = path.read_bytes()
    dt = DTYPES[meta["dtype"]]
    shape = tuple(meta["shape"])
    if len(raw) != dt.itemsize * int(np.prod(shape, dtype=np.int64)):
        raise ArrayFileError(f"{path}: {len(raw)} bytes do not match shape {shape} of {meta['dtype']}")
    if verify and hashlib.sha256(raw).hexdigest() != meta["sha256"]:
        raise ArrayFileError(f"{path}: checksum mismatch")
    return np.frombuffer(raw, dtype=dt).reshape(shape).copy(), meta


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def emit_plot_csv(kind: str, inputs: dict, path) -> Path:
    """Write one of the figure tables.

    ``wavefunction_snapshots``: x, times, reconstructed, exact (rows per time)
    ``potential_compare``: x, reconstructed, exact, mask
    ``correlation_set``: t, values (t x G), optional exact
    ``leaderboard``: candidates (objects with label, variance, fidelity)
    ``fidelity``: t, fidelity
    """
    if kind not in CSV_KINDS:
        raise ValueError(f"unknown CSV kind {kind!r}; choose from {CSV_KINDS}")
    if kind == "wavefunction_snapshots":
        x = inputs["x"]
        header = ["x_bohr"]
        cols = []
        for t, rec, ex in zip(inputs["times"], inputs["reconstructed"], inputs["exact"]):
            tag = f"{t:g}fs"
            header += [f"re_rec_{tag}", f"im_rec_{tag}", f"re_exact_{tag}", f"im_exact_{tag}"]
            cols += [np.real(rec), np.imag(rec), np.real(ex), np.imag(ex)]
        return _write_rows(path, header, zip(x, *cols))
    if kind == "potential_compare":
        return _write_rows(path, ["x_bohr", "V_reconstructed", "V_exact", "mask"],
                           zip(inputs["x"], inputs["reconstructed"], inputs["exact"], inputs["mask"]))
    if kind == "correlation_set":
        vals = np.asarray(inputs["values"])
        header = ["t_fs"]
        cols = []
        for g in range(vals.shape[1]):
            header += [f"re_c{g}", f"im_c{g}"]
            cols += [vals[:, g].real, vals[:, g].imag]
        if "exact" in inputs:
            ex = np.asarray(inputs["exact"])
            for g in range(ex.shape[1]):
                header += [f"re_exact_c{g}", f"im_exact_c{g}"]
                cols += [ex[:, g].real, ex[:, g].imag]
        return _write_rows(path, header, zip(inputs["t"], *cols))
    if kind == "leaderboard":
        cands = sorted(inputs["candidates"], key=lambda c: c.rank_key())
        return _write_rows(path, ["rank", "signs", "sigma2", "fidelity"],
                           ((i, c.label, c.variance, c.fidelity) for i, c in enumerate(cands)))
    return _write_rows(path, ["t_fs", "fidelity"], zip(inputs["t"], inputs["fidelity"]))
