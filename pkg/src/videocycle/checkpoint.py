"""Versioned checkpoint container.

A checkpoint is a zip archive holding ``meta.json`` plus one ``.npy`` entry
per named array under ``arrays/``. The npy format records dtype and shape and
stores row-major bytes, so a save/load round trip is bit-exact. Array keys
may contain ``/`` and form a small namespace, e.g. ``net/G/model.1.weight``
or ``opt/G/3/m``.

``meta.json`` always carries ``format_version``, a ``kind`` tag
("temporal" or "single_frame"), and the config header needed to rebuild the
networks (image size, width multiplier, residual block count).
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

# fixed zip timestamp keeps archives independent of wall-clock time
_EPOCH = (1980, 1, 1, 0, 0, 0)


def save_container(path, meta: dict, arrays: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = dict(meta)
    meta["format_version"] = FORMAT_VERSION
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        info = zipfile.ZipInfo("meta.json", date_time=_EPOCH)
        zf.writestr(info, json.dumps(meta, indent=2, sort_keys=True))
        for key in sorted(arrays):
            buf = io.BytesIO()
            np.save(buf, np.ascontiguousarray(arrays[key]))
            info = zipfile.ZipInfo(f"arrays/{key}.npy", date_time=_EPOCH)
            zf.writestr(info, buf.getvalue())
    return path


def load_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such checkpoint: {path}")
    with zipfile.ZipFile(path, "r") as zf:
        try:
            meta = json.loads(zf.read("meta.json"))
        except KeyError:
            raise ValueError(f"{path}: not a checkpoint container (meta.json missing)")
        version = meta.get("format_version")
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version!r}")
        arrays = {}
        for name in zf.namelist():
            if name.startswith("arrays/") and name.endswith(".npy"):
                key = name[len("arrays/") : -len(".npy")]
                arrays[key] = np.load(io.BytesIO(zf.read(name)))
    return meta, arrays
