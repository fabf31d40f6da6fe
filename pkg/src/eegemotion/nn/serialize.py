"""Weight file format ``SMW1``.

Layout (little-endian)::

    b"SMW1"
    u32 header_len, header_len bytes of JSON {"fingerprint", "architecture"}
    for each layer: u32 n_tensors
        for each tensor: u16 name_len, name, u8 ndim, u32 dims[ndim], float32 data
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from ..corpus.storage import atomic_write_bytes
from .network import Network, network_from_architecture

MAGIC = b"SMW1"
_F32 = np.dtype("<f4")


class WeightFormatError(ValueError):
    pass


class FingerprintMismatch(WeightFormatError):
    pass


def save_weights(net: Network, path: str | Path) -> Path:
    buf = io.BytesIO()
    buf.write(MAGIC)
    header = json.dumps({"fingerprint": net.fingerprint(),
                         "architecture": net.architecture()}, sort_keys=True).encode()
    buf.write(struct.pack("<I", len(header)))
    buf.write(header)
    for layer in net.layers:
        buf.write(struct.pack("<I", len(layer.params)))
        for name, value in layer.params.items():
            encoded = name.encode()
            buf.write(struct.pack("<H", len(encoded)))
            buf.write(encoded)
            buf.write(struct.pack("<B", value.ndim))
            buf.write(struct.pack(f"<{value.ndim}I", *value.shape))
            buf.write(np.ascontiguousarray(value, dtype=_F32).tobytes())
    path = Path(path)
    atomic_write_bytes(path, buf.getvalue())
    return path


def _take(raw: memoryview, pos: int, n: int) -> tuple[bytes, int]:
    if pos + n > len(raw):
        raise WeightFormatError("weight file truncated")
    return bytes(raw[pos:pos + n]), pos + n


def load_weights(path: str | Path, into: Optional[Network] = None) -> Network:
    """Read a weight file into a fresh Network, or into ``into`` after a fingerprint check."""
    raw = memoryview(Path(path).read_bytes())
    magic, pos = _take(raw, 0, 4)
    if magic != MAGIC:
        raise WeightFormatError(f"bad magic {magic!r}; expected {MAGIC!r}")
    (header_len,), pos = struct.unpack("<I", _take(raw, pos, 4)[0]), pos + 4
    header_raw, pos = _take(raw, pos, header_len)
    try:
        header = json.loads(header_raw)
        fingerprint, arch = header["fingerprint"], header["architecture"]
    except (ValueError, KeyError) as exc:
        raise WeightFormatError(f"malformed header: {exc}") from exc

    if into is not None:
        if into.fingerprint() != fingerprint:
            raise FingerprintMismatch(
                f"architecture fingerprint mismatch: file {fingerprint[:12]}..., "
                f"network {into.fingerprint()[:12]}...")
        net = into
    else:
        net = network_from_architecture(arch)
        if net.fingerprint() != fingerprint:
            raise FingerprintMismatch("stored architecture does not reproduce its fingerprint")

    weights = []
    for layer in net.layers:
        (count,), pos = struct.unpack("<I", _take(raw, pos, 4)[0]), pos + 4
        tensors = {}
        for _ in range(count):
            (name_len,), pos = struct.unpack("<H", _take(raw, pos, 2)[0]), pos + 2
            name, pos = _take(raw, pos, name_len)
            (ndim,), pos = struct.unpack("<B", _take(raw, pos, 1)[0]), pos + 1
            dims_raw, pos = _take(raw, pos, 4 * ndim)
            shape = struct.unpack(f"<{ndim}I", dims_raw)
            data, pos = _take(raw, pos, int(np.prod(shape)) * 4)
            tensors[name.decode()] = np.frombuffer(data, dtype=_F32).reshape(shape)
        weights.append(tensors)
    if pos != len(raw):
        raise WeightFormatError(f"{len(raw) - pos} trailing bytes after last tensor")
    net.set_weights(weights)
    return net
