"""Checkpoint archive: parameter name -> float64 array, plus a schema tag.

The file is a standard ``.npz`` (readable with :func:`numpy.load`) written
with fixed zip timestamps and sorted entry names, so identical parameters
always give identical bytes.
"""

from __future__ import annotations

import json
import os
import zipfile
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import CheckpointError

SCHEMA_VERSION = "hybrid-memnet-checkpoint/1"
_SCHEMA_KEY = "__schema__"
_META_KEY = "__meta__"
_EPOCH = (1980, 1, 1, 0, 0, 0)


def _write_entry(zf: zipfile.ZipFile, name: str, array: np.ndarray) -> None:
    info = zipfile.ZipInfo(name + ".npy", date_time=_EPOCH)
    info.external_attr = 0o644 << 16
    with zf.open(info, "w", force_zip64=True) as fh:
        np.lib.format.write_array(fh, np.require(array, requirements="C"), allow_pickle=False)


def save_checkpoint(path, arrays: Mapping[str, np.ndarray], meta: Mapping[str, Any] | None = None) -> Path:
    path = Path(path)
    for name in arrays:
        if name.startswith("__"):
            raise CheckpointError(f"reserved parameter name {name!r}")
    tmp = path.with_name(path.name + ".tmp")
    with zipfile.ZipFile(tmp, "w", compression=zipfile.ZIP_STORED) as zf:
        _write_entry(zf, _SCHEMA_KEY, np.array(SCHEMA_VERSION))
        _write_entry(zf, _META_KEY, np.array(json.dumps(meta or {}, sort_keys=True)))
        for name in sorted(arrays):
            _write_entry(zf, name, np.asarray(arrays[name], dtype=np.float64))
    os.replace(tmp, path)
    return path


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Return ``(arrays, meta)``; raises :class:`CheckpointError` on schema mismatch."""
    try:
        with np.load(path, allow_pickle=False) as archive:
            schema = str(archive[_SCHEMA_KEY]) if _SCHEMA_KEY in archive.files else None
            if schema != SCHEMA_VERSION:
                raise CheckpointError(f"{path}: unsupported checkpoint schema {schema!r}")
            meta = json.loads(str(archive[_META_KEY]))
            arrays = {k: archive[k] for k in archive.files if not k.startswith("__")}
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"{path}: cannot read checkpoint: {exc}") from exc
    return arrays, meta
