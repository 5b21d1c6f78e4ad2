"""CSV and JSON formats used by the command line.

CSV files have a header row and floats written with 17 significant digits,
which round-trips IEEE doubles exactly.

* data vectors: ``t,d`` or ``t,d,shots``
* spectra: ``omega,F``; likelihood profiles: ``omega,logP``; grids: ``t``
* systems (JSON): ``{"M": ..., "H": ..., "rho0": ...}`` where each matrix is
  a nested list of reals or ``{"re": [[...]], "im": [[...]]}``; ``M`` may
  also be a flat list holding its diagonal.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import InputFormatError
from .identifiability import SystemSpec
from .simulator import DataVector


def fmt(value: float) -> str:
    return f"{value:.17g}"


def write_columns(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([fmt(v) if isinstance(v, float) else str(v) for v in row])


def write_data(path, data: DataVector) -> None:
    if data.shots is None:
        write_columns(path, ["t", "d"], [data.times.tolist(), data.values.tolist()])
    else:
        write_columns(path, ["t", "d", "shots"], [data.times.tolist(), data.values.tolist(), data.shots.tolist()])


def read_data(path, horizon: float | None = None) -> DataVector:
    """Read a ``t,d[,shots]`` CSV; errors name the offending line and field."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header not in (["t", "d"], ["t", "d", "shots"]):
        raise InputFormatError(f"{path}:1: header must be 't,d' or 't,d,shots', got {','.join(header)!r}")
    times, values, shots = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise InputFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for name, cell in zip(header, row):
            try:
                value = int(cell) if name == "shots" else float(cell)
            except ValueError:
                raise InputFormatError(f"{path}:{lineno}: field {name!r} is not a number: {cell!r}") from None
            if name != "shots" and not math.isfinite(value):
                raise InputFormatError(f"{path}:{lineno}: field {name!r} is not finite")
            if name == "d" and not 0.0 <= value <= 1.0:
                raise InputFormatError(f"{path}:{lineno}: field 'd' must lie in [0, 1], got {cell!r}")
            {"t": times, "d": values, "shots": shots}[name].append(value)
    if len(times) < 2:
        raise InputFormatError(f"{path}: need at least 2 data rows")
    if np.any(np.diff(times) <= 0):
        bad = int(np.flatnonzero(np.diff(times) <= 0)[0]) + 3
        raise InputFormatError(f"{path}:{bad}: field 't' must be strictly increasing")
    return DataVector(np.array(times), np.array(values), np.array(shots) if shots else None, horizon)


def _matrix(raw, field):
    try:
        if isinstance(raw, dict):
            unknown = set(raw) - {"re", "im"}
            if unknown or "re" not in raw:
                raise InputFormatError(f"field {field!r}: expected keys 're' and optional 'im'")
            re = np.array(raw["re"], dtype=float)
            im = np.array(raw.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise InputFormatError(f"field {field!r}: 're' and 'im' differ in shape")
            return re + 1j * im
        return np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputFormatError):
            raise
        raise InputFormatError(f"field {field!r}: not a numeric matrix ({exc})") from None


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def parse_system(raw: dict) -> tuple:
    """Build a ``SystemSpec`` from decoded JSON; returns ``(spec, extras)``.

    ``extras`` carries the optional keys ``H_alt`` (a second Hamiltonian to
    compare against, as an array), ``times`` and ``tol``.
    """
    if not isinstance(raw, dict):
        raise InputFormatError("system file must hold a JSON object")
    for key in ("M", "H", "rho0"):
        if key not in raw:
            raise InputFormatError(f"missing field {key!r}")
    try:
        spec = SystemSpec(_matrix(raw["M"], "M"), _matrix(raw["H"], "H"), _matrix(raw["rho0"], "rho0"))
    except ValueError as exc:
        if isinstance(exc, InputFormatError):
            raise
        raise InputFormatError(str(exc)) from None
    extras = {}
    if "H_alt" in raw:
        extras["H_alt"] = _matrix(raw["H_alt"], "H_alt")
        if extras["H_alt"].shape != spec.H.shape:
            raise InputFormatError("field 'H_alt': shape differs from 'H'")
    if "times" in raw:
        extras["times"] = _matrix(raw["times"], "times").ravel()
    if "tol" in raw:
        extras["tol"] = float(raw["tol"])
    return spec, extras


def read_system(path) -> tuple:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    try:
        return parse_system(raw)
    except InputFormatError as exc:
        raise InputFormatError(f"{path}: {exc}") from None


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
