"""Parameter files: one JSON header line, then little-endian float32 data.

Header: ``{"format": "uodkit-params", "version": 1, "meta": {...},
"tensors": [{"name": ..., "shape": [...]}, ...]}`` followed by ``\\n`` and the
concatenated tensors in header order.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..common.exceptions import ParamFileError, ShapeMismatchError, TensorError
from .tensor import ParamDict

_FORMAT = "uodkit-params"
_VERSION = 1
_DTYPE = np.dtype("<f4")


def save_params(path: Path, params: ParamDict, meta: Optional[Dict[str, Any]] = None) -> None:
    header = {
        "format": _FORMAT,
        "version": _VERSION,
        "meta": meta or {},
        "tensors": [
            {"name": name, "shape": list(value.shape)} for name, value in params.items()
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(json.dumps(header).encode("utf-8"))
        f.write(b"\n")
        for value in params.values():
            f.write(np.ascontiguousarray(value, dtype=_DTYPE).tobytes())


def load_params(path: Path) -> Tuple[ParamDict, Dict[str, Any]]:
    """Return ``(params, meta)``; arrays come back as native float32."""
    with open(path, "rb") as f:
        header_line = f.readline()
        body = f.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParamFileError(path, f"unreadable header ({e})") from e
    if not isinstance(header, dict) or header.get("format") != _FORMAT:
        raise ParamFileError(path, f"not a {_FORMAT} file")

    params: ParamDict = {}
    offset = 0
    for entry in header.get("tensors", []):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        nbytes = count * _DTYPE.itemsize
        if offset + nbytes > len(body):
            raise ParamFileError(path, f"truncated data for tensor '{entry['name']}'")
        chunk = np.frombuffer(body, dtype=_DTYPE, count=count, offset=offset)
        params[entry["name"]] = chunk.astype(np.float32).reshape(shape)
        offset += nbytes
    if offset != len(body):
        raise ParamFileError(path, f"{len(body) - offset} trailing bytes after tensors")
    return params, header.get("meta", {})


def assign_params(target: ParamDict, source: ParamDict) -> None:
    """Copy ``source`` arrays into the (live) arrays of ``target`` in place."""
    missing = target.keys() - source.keys()
    extra = source.keys() - target.keys()
    if missing or extra:
        raise TensorError(
            f"parameter names differ: missing={sorted(missing)} extra={sorted(extra)}"
        )
    for name, value in target.items():
        if value.shape != source[name].shape:
            raise ShapeMismatchError(name, value.shape, source[name].shape, "assign_params")
        value[...] = source[name]
