import struct

import numpy as np
import pytest

from tradeoff_ann.io import (FormatError, read_dataset, read_envelope, write_dataset,
                             write_envelope)
from tradeoff_ann.pointset import PointSet


def test_sphere_roundtrip(tmp_path, rng):
    x = rng.standard_normal((7, 5))
    write_dataset(tmp_path / "a.data", PointSet(x, "sphere", {"seed": 3}))
    back = read_dataset(tmp_path / "a.data")
    assert back.space == "sphere" and back.meta["seed"] == 3
    np.testing.assert_allclose(back.data, x.astype(np.float32))


def test_hamming_roundtrip(tmp_path, rng):
    x = np.where(rng.random((9, 13)) < 0.5, -1, 1).astype(np.int8)
    write_dataset(tmp_path / "h.data", PointSet(x, "hamming"))
    assert np.array_equal(read_dataset(tmp_path / "h.data").data, x)


def test_envelope_roundtrip(tmp_path):
    arrs = {"a": np.arange(5, dtype=np.int32), "b": np.ones((2, 3))}
    write_envelope(tmp_path / "t.bin", 1, {"x": 1}, arrs)
    kind, header, back = read_envelope(tmp_path / "t.bin")
    assert kind == 1 and header["x"] == 1
    for k in arrs:
        assert np.array_equal(back[k], arrs[k])


@pytest.mark.parametrize("mutate", [
    lambda b: b"NOTADATA" + b[8:],
    lambda b: b[:-3],
    lambda b: b[:8] + struct.pack("<H", 9) + b[10:],
    lambda b: b[:10] + bytes([7]) + b[11:],
    lambda b: b[:5],
])
def test_malformed_dataset(tmp_path, rng, mutate):
    p = tmp_path / "a.data"
    write_dataset(p, PointSet(rng.standard_normal((3, 4)), "sphere"))
    p.write_bytes(mutate(p.read_bytes()))
    with pytest.raises(FormatError):
        read_dataset(p)


@pytest.mark.parametrize("mutate", [
    lambda b: b"XXXXXXXX" + b[8:],
    lambda b: b[:-1],
    lambda b: b + b"\0",
    lambda b: b[:16] + b"X" + b[17:],
])
def test_malformed_envelope(tmp_path, mutate):
    p = tmp_path / "t.bin"
    write_envelope(p, 1, {}, {"a": np.arange(4)})
    p.write_bytes(mutate(p.read_bytes()))
    with pytest.raises(FormatError):
        read_envelope(p)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        read_dataset(tmp_path / "nope")
