"""Binary density-frame encoding streamed to rendering clients.

Layout (little endian, 24-byte header):

    magic   4 bytes  "ARCD"
    version u8       1
    _       3 bytes  reserved, zero
    iter    u32
    nx      u32
    ny      u32
    nz      u32
    payload nx*ny*nz bytes, x fastest then y then z,
            each byte round(255 * x_phys); passive voids are 0
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"ARCD"
VERSION = 1
_HEADER = struct.Struct("<4sB3xIIII")
HEADER_SIZE = _HEADER.size  # 24


def quantize(x_phys: np.ndarray, passive: np.ndarray | None = None) -> np.ndarray:
    """8-bit density levels; passive elements forced to zero."""
    q = np.rint(255.0 * np.clip(np.asarray(x_phys, dtype=float), 0.0, 1.0))
    q = q.astype(np.uint8)
    if passive is not None:
        q = np.where(passive, np.uint8(0), q)
    return q


def pack_frame(iteration: int, shape: tuple[int, int, int], payload: bytes) -> bytes:
    """Prepend the header to one already-quantized payload."""
    nx, ny, nz = shape
    if len(payload) != nx * ny * nz:
        raise ValueError(f"payload size {len(payload)} does not match {nx}x{ny}x{nz}")
    return _HEADER.pack(MAGIC, VERSION, iteration, nx, ny, nz) + payload


def encode_frame(
    iteration: int,
    shape: tuple[int, int, int],
    x_phys: np.ndarray,
    passive: np.ndarray | None = None,
) -> bytes:
    return pack_frame(iteration, shape, quantize(x_phys, passive).tobytes())


@dataclass(frozen=True)
class Frame:
    iteration: int
    shape: tuple[int, int, int]
    densities: np.ndarray  # uint8, flat x-fastest


def decode_frame(data: bytes) -> Frame:
    if len(data) < HEADER_SIZE:
        raise ValueError("frame shorter than header")
    magic, version, iteration, nx, ny, nz = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported frame version {version}")
    n = nx * ny * nz
    payload = data[HEADER_SIZE:]
    if len(payload) != n:
        raise ValueError(f"payload length {len(payload)} != {n}")
    dens = np.frombuffer(payload, dtype=np.uint8).copy()
    return Frame(iteration, (nx, ny, nz), dens)
