"""Binary file formats.

Dataset file (little-endian)::

    magic   8 bytes  b"TANNDATA"
    version u16      1
    space   u8       0 = sphere, 1 = hamming, 2 = euclidean
    pad     u8       0
    n       u64
    d       u32
    payload          sphere/euclidean: n*d float32, row-major
                     hamming: n rows of ceil(d/8) bytes, np.packbits of (x > 0)

A sidecar ``<file>.json`` holds generation parameters and seeds.

Structure file (little-endian)::

    magic   8 bytes  b"TANNTREE"
    version u16      1
    kind    u8       1 = filter tree, 2 = data-dependent tree
    pad     u8       0
    hlen    u32      length of the JSON header
    header           UTF-8 JSON; header["arrays"] lists [name, dtype, shape]
    arrays           raw little-endian array bytes in header order
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .pointset import PointSet

DATA_MAGIC = b"TANNDATA"
TREE_MAGIC = b"TANNTREE"
VERSION = 1
SPACE_TAGS = {"sphere": 0, "hamming": 1, "euclidean": 2}
TAG_SPACES = {v: k for k, v in SPACE_TAGS.items()}
KIND_FILTER = 1
KIND_DD = 2


class FormatError(ValueError):
    """Malformed or unsupported file."""


def write_dataset(path, ps: PointSet, meta: dict | None = None) -> None:
    path = Path(path)
    n, d = ps.data.shape
    head = DATA_MAGIC + struct.pack("<HBBQI", VERSION, SPACE_TAGS[ps.space], 0, n, d)
    if ps.space == "hamming":
        body = np.packbits(np.asarray(ps.data) > 0, axis=1).tobytes()
    else:
        body = np.ascontiguousarray(ps.data, dtype="<f4").tobytes()
    path.write_bytes(head + body)
    side = dict(ps.meta if meta is None else meta)
    side = {k: v for k, v in side.items() if _jsonable(v)}
    Path(str(path) + ".json").write_text(json.dumps(dict(side, n=n, d=d, space=ps.space),
                                                    indent=2, sort_keys=True) + "\n")


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def read_dataset(path) -> PointSet:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from e
    hsize = len(DATA_MAGIC) + struct.calcsize("<HBBQI")
    if len(raw) < hsize or raw[:8] != DATA_MAGIC:
        raise FormatError(f"{path}: not a dataset file")
    version, tag, _, n, d = struct.unpack_from("<HBBQI", raw, 8)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported dataset version {version}")
    if tag not in TAG_SPACES:
        raise FormatError(f"{path}: unknown space tag {tag}")
    space = TAG_SPACES[tag]
    body = raw[hsize:]
    if space == "hamming":
        row = (d + 7) // 8
        if len(body) != n * row:
            raise FormatError(f"{path}: payload size mismatch")
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8).reshape(n, row), axis=1)[:, :d]
        data = (2 * bits.astype(np.int8) - 1)
    else:
        if len(body) != 4 * n * d:
            raise FormatError(f"{path}: payload size mismatch")
        data = np.frombuffer(body, dtype="<f4").reshape(n, d).astype(float)
    meta = {}
    side = Path(str(path) + ".json")
    if side.exists():
        try:
            meta = json.loads(side.read_text())
        except json.JSONDecodeError as e:
            raise FormatError(f"{side}: bad metadata: {e}") from e
    return PointSet(data, space, meta)


def write_envelope(path, kind: int, header: dict, arrays: dict[str, np.ndarray]) -> None:
    specs = []
    blobs = []
    for name, a in arrays.items():
        a = np.ascontiguousarray(a, dtype=a.dtype.newbyteorder("<"))
        specs.append([name, a.dtype.str, list(a.shape)])
        blobs.append(a.tobytes())
    header = dict(header, arrays=specs)
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(TREE_MAGIC + struct.pack("<HBBI", VERSION, kind, 0, len(hb)))
        f.write(hb)
        for b in blobs:
            f.write(b)


def read_envelope(path) -> tuple[int, dict, dict[str, np.ndarray]]:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from e
    fixed = 8 + struct.calcsize("<HBBI")
    if len(raw) < fixed or raw[:8] != TREE_MAGIC:
        raise FormatError(f"{path}: not a structure file")
    version, kind, _, hlen = struct.unpack_from("<HBBI", raw, 8)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported structure version {version}")
    try:
        header = json.loads(raw[fixed:fixed + hlen].decode("utf-8"))
        arrays = {}
        off = fixed + hlen
        for name, dt, shape in header["arrays"]:
            dt = np.dtype(dt)
            size = dt.itemsize * int(np.prod(shape, dtype=np.int64))
            if off + size > len(raw):
                raise FormatError(f"{path}: truncated array {name}")
            arrays[name] = np.frombuffer(raw, dtype=dt, count=size // dt.itemsize,
                                         offset=off).reshape(shape).copy()
            off += size
    except (KeyError, ValueError, TypeError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"{path}: corrupt header: {e}") from e
    if off != len(raw):
        raise FormatError(f"{path}: trailing bytes")
    return kind, header, arrays
