"""EpochSet on-disk format, version 1.

A directory holding ``manifest.json`` and ``data.f32le``. The data file is the
raw little-endian float32 samples, epoch-major, then channel, then sample; its
byte length must equal ``n_epochs * n_channels * n_samples * 4``.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from .records import EpochRecord, EpochSet, Geometry, Ratings

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
DATA_NAME = "data.f32le"
_DTYPE = np.dtype("<f4")


class EpochSetFormatError(ValueError):
    pass


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _record_entry(record: EpochRecord, offset: int) -> dict:
    entry = {"subject": record.subject_id, "trial": record.trial_id}
    if record.ratings is not None:
        entry["valence"] = record.ratings.valence
        entry["arousal"] = record.ratings.arousal
    if record.discrete_label is not None:
        entry["label"] = record.discrete_label
    entry["emotional"] = record.emotional
    entry["offset_bytes"] = offset
    return entry


def write_epochset(epochs: EpochSet, path: str | Path, config: Optional[dict] = None) -> Path:
    """Write the v1 directory; ``config`` is echoed into the manifest when given."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    g = epochs.geometry
    epoch_bytes = g.n_channels * g.n_samples * _DTYPE.itemsize
    manifest = {
        "format_version": FORMAT_VERSION,
        "dataset_name": epochs.dataset_name,
        "n_epochs": len(epochs),
        "n_channels": g.n_channels,
        "n_samples": g.n_samples,
        "fs_hz": g.fs,
        "scheme": epochs.scheme,
        "seed": epochs.seed,
        "geometry": g.to_dict(),
        **({"config": config} if config is not None else {}),
        "records": [_record_entry(r, i * epoch_bytes) for i, r in enumerate(epochs.records)],
    }
    data = b"".join(np.ascontiguousarray(r.channels, dtype=_DTYPE).tobytes()
                    for r in epochs.records)
    atomic_write_bytes(path / DATA_NAME, data)
    atomic_write_bytes(path / MANIFEST_NAME, json.dumps(manifest, indent=1).encode())
    return path


def read_epochset(path: str | Path) -> EpochSet:
    path = Path(path)
    manifest_path, data_path = path / MANIFEST_NAME, path / DATA_NAME
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {path}")
    if not data_path.is_file():
        raise FileNotFoundError(f"no {DATA_NAME} in {path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise EpochSetFormatError(f"malformed manifest {manifest_path}: {exc}") from exc
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise EpochSetFormatError(
            f"unsupported format_version {version!r}; this reader handles {FORMAT_VERSION}")
    try:
        n_epochs = int(manifest["n_epochs"])
        n_channels = int(manifest["n_channels"])
        n_samples = int(manifest["n_samples"])
        fs = float(manifest["fs_hz"])
        entries = manifest["records"]
    except (KeyError, TypeError, ValueError) as exc:
        raise EpochSetFormatError(f"manifest missing or bad field: {exc}") from exc
    if len(entries) != n_epochs:
        raise EpochSetFormatError(
            f"manifest lists {len(entries)} records but declares n_epochs={n_epochs}")

    expected = n_epochs * n_channels * n_samples * _DTYPE.itemsize
    actual = data_path.stat().st_size
    if actual != expected:
        raise EpochSetFormatError(
            f"data size mismatch: expected {expected} bytes "
            f"({n_epochs} epochs x {n_channels} channels x {n_samples} samples x 4), "
            f"found {actual} bytes")

    geometry = Geometry.from_dict(manifest.get("geometry") or {
        "name": manifest.get("dataset_name", "custom"), "n_channels": n_channels,
        "n_samples": n_samples, "fs": fs})
    if (geometry.n_channels, geometry.n_samples, geometry.fs) != (n_channels, n_samples, fs):
        raise EpochSetFormatError("geometry block disagrees with n_channels/n_samples/fs_hz")

    data = np.fromfile(data_path, dtype=_DTYPE).reshape(n_epochs, n_channels, n_samples)
    epoch_bytes = n_channels * n_samples * _DTYPE.itemsize
    records = []
    for i, e in enumerate(entries):
        if int(e.get("offset_bytes", i * epoch_bytes)) != i * epoch_bytes:
            raise EpochSetFormatError(f"record {i} offset_bytes does not match its position")
        ratings = Ratings(float(e["valence"]), float(e["arousal"])) if "valence" in e else None
        label = e.get("label")
        records.append(EpochRecord(
            subject_id=int(e["subject"]), trial_id=int(e["trial"]), fs=fs,
            channels=data[i].astype(np.float32),
            ratings=ratings,
            discrete_label=None if label is None else int(label),
            emotional=bool(e.get("emotional", True)),
        ))
    return EpochSet(manifest.get("dataset_name", ""), geometry, records,
                    scheme=manifest.get("scheme", "valence3"), seed=manifest.get("seed"))
