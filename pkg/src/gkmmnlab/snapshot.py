"""Bit-exact binary field archive.

Layout (little-endian)::

    b"GKMM" | version u32 | Nx u32 | Ny u32 | Lx f64 | Ly f64 | t f64 | kind 16 bytes ASCII
    Nx*Ny complex values as (re, im) f64 pairs, row-major (x slowest)

A file that ends inside the header or inside a complex value is truncated;
a whole number of values that disagrees with ``Nx*Ny`` is a dimension
mismatch.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Domain, Field

MAGIC = b"GKMM"
VERSION = 1
KIND_BYTES = 16
_HEADER = struct.Struct("<4sIIIddd16s")
_VALUE = np.dtype("<c16")


class SnapshotError(ValueError):
    pass


class BadMagicError(SnapshotError):
    pass


class TruncatedError(SnapshotError):
    pass


class VersionMismatchError(SnapshotError):
    pass


class DimensionMismatchError(SnapshotError):
    pass


@dataclass(frozen=True, eq=False)
class Snapshot:
    field: Field
    t: float = 0.0
    kind: str = "field"

    def __post_init__(self):
        raw = self.kind.encode("ascii")
        if len(raw) > KIND_BYTES:
            raise ValueError(f"kind tag longer than {KIND_BYTES} bytes")


def encode(snap: Snapshot) -> bytes:
    d = snap.field.domain
    header = _HEADER.pack(MAGIC, VERSION, d.Nx, d.Ny, float(d.Lx), float(d.Ly), float(snap.t),
                          snap.kind.encode("ascii").ljust(KIND_BYTES, b"\0"))
    return header + np.ascontiguousarray(snap.field.values, dtype=_VALUE).tobytes()


def decode(data: bytes, expected: Domain | None = None) -> Snapshot:
    if len(data) < len(MAGIC) or data[:4] != MAGIC:
        raise BadMagicError("not a snapshot file (bad magic)")
    if len(data) < _HEADER.size:
        raise TruncatedError(f"file ends inside the header ({len(data)} of {_HEADER.size} bytes)")
    _, version, nx, ny, lx, ly, t, kind = _HEADER.unpack_from(data)
    if version != VERSION:
        raise VersionMismatchError(f"snapshot version {version}, reader supports {VERSION}")
    payload = len(data) - _HEADER.size
    if payload % _VALUE.itemsize:
        raise TruncatedError(f"payload ends inside a value ({payload} bytes)")
    count = payload // _VALUE.itemsize
    if count != nx * ny:
        raise DimensionMismatchError(f"header says {nx}x{ny} = {nx * ny} values, payload has {count}")
    try:
        domain = Domain(lx, ly, nx, ny)
    except ValueError as e:
        raise DimensionMismatchError(str(e)) from e
    if expected is not None and domain != expected:
        raise DimensionMismatchError(f"snapshot domain {domain} differs from expected {expected}")
    values = np.frombuffer(data, dtype=_VALUE, offset=_HEADER.size).reshape(nx, ny)
    return Snapshot(Field(domain, values), t, kind.rstrip(b"\0").decode("ascii"))


def write_snapshot(snap: Snapshot, path: str | Path) -> None:
    Path(path).write_bytes(encode(snap))


def read_snapshot(path: str | Path, expected: Domain | None = None) -> Snapshot:
    return decode(Path(path).read_bytes(), expected)
