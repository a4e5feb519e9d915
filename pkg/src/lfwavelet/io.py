"""JSON and CSV formats for functions, reports and per-cell tables.

Every JSON object carries ``format_version``.  Complex amplitudes are
``[re, im]`` pairs written with Python's shortest round-trip float repr,
so write-then-read reproduces every double bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import FormatError, LFWaveletError
from .field import FieldParams, LaurentElem
from .functions import TestFunction, Window

FORMAT_VERSION = 1


def _require(obj: Mapping, key: str, where: str) -> Any:
    if not isinstance(obj, Mapping) or key not in obj:
        raise FormatError(f"{where}: missing field '{key}'")
    return obj[key]


def _int_field(obj: Mapping, key: str, where: str) -> int:
    val = _require(obj, key, where)
    if isinstance(val, bool) or not isinstance(val, int):
        raise FormatError(f"{where}.{key}: expected an integer, got {val!r}")
    return val


def complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def pair_to_complex(pair: Any, where: str) -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise FormatError(f"{where}: expected [re, im], got {pair!r}")
    re, im = pair
    for part in (re, im):
        if isinstance(part, bool) or not isinstance(part, (int, float)) or not math.isfinite(part):
            raise FormatError(f"{where}: non-numeric or non-finite component {part!r}")
    return complex(float(re), float(im))


# --- field and Laurent elements -----------------------------------------------------------


def field_to_dict(params: FieldParams) -> dict:
    return params.to_dict()


def field_from_dict(data: Any, where: str = "field") -> FieldParams:
    p = _int_field(data, "p", where)
    c = _int_field(data, "c", where)
    red = data.get("reduction")
    if red is not None and (not isinstance(red, list) or not all(isinstance(r, int) for r in red)):
        raise FormatError(f"{where}.reduction: expected a list of integers")
    try:
        return FieldParams(p, c, tuple(red) if red is not None else None)
    except LFWaveletError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def laurent_to_list(x: LaurentElem) -> list:
    return x.to_list()


def laurent_from_list(params: FieldParams, data: Any) -> LaurentElem:
    try:
        return LaurentElem.from_list(params, data)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"laurent element: {exc}") from exc


# --- test functions ----------------------------------------------------------------------------


def function_to_dict(f: TestFunction, metadata: Mapping | None = None) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "field": field_to_dict(f.params),
        "side": f.side,
        "window": {"M": f.window.M, "N": f.window.N},
        "values": [complex_to_pair(z) for z in f.values],
    }
    if metadata:
        out["metadata"] = dict(metadata)
    return out


def function_from_dict(data: Any) -> tuple[TestFunction, dict]:
    if not isinstance(data, Mapping):
        raise FormatError("function file: top level must be a JSON object")
    version = _int_field(data, "format_version", "function file")
    if version != FORMAT_VERSION:
        raise FormatError(f"format_version: unsupported version {version}")
    params = field_from_dict(_require(data, "field", "function file"))
    side = _require(data, "side", "function file")
    if side not in ("point", "frequency"):
        raise FormatError(f"side: expected 'point' or 'frequency', got {side!r}")
    win = _require(data, "window", "function file")
    M, N = _int_field(win, "M", "window"), _int_field(win, "N", "window")
    if M < 0 or N < 0:
        raise FormatError("window: M and N must be >= 0")
    raw = _require(data, "values", "function file")
    if not isinstance(raw, list):
        raise FormatError("values: expected a list of [re, im] pairs")
    expected = params.q ** (M + N)
    if len(raw) != expected:
        raise FormatError(f"values: window ({M},{N}) needs {expected} entries, got {len(raw)}")
    vals = np.array([pair_to_complex(v, f"values[{i}]") for i, v in enumerate(raw)], dtype=complex)
    meta = data.get("metadata", {})
    if not isinstance(meta, Mapping):
        raise FormatError("metadata: expected an object")
    return TestFunction(params, side, Window(M, N), vals), dict(meta)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path: Path | str, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(_plain(obj)))
    return path


def read_json(path: Path | str) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def write_function(path: Path | str, f: TestFunction, metadata: Mapping | None = None) -> Path:
    return write_json(path, function_to_dict(f, metadata))


def read_function(path: Path | str) -> tuple[TestFunction, dict]:
    try:
        return function_from_dict(read_json(path))
    except FormatError as exc:
        if str(exc).startswith(str(path)):
            raise
        raise FormatError(f"{path}: {exc}") from exc


# --- reports and tables ---------------------------------------------------------------------------


def _plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers to JSON-ready values."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_pair(complex(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else None
    return obj


def write_csv(path: Path | str, rows: Iterable[Mapping], columns: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _csv_value(row.get(c)) for c in columns})
    return path


def _csv_value(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def read_csv(path: Path | str) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
