import numpy as np
import pytest

from lassoprune import FormatError, ParameterError, ShapeError, load_array, save_array


def test_round_trip_bit_identical(tmp_path, rng):
    a = rng.standard_normal((7, 5))
    path = tmp_path / "a.npy"
    save_array(path, a)
    back = load_array(path)
    assert back.dtype == np.float64
    assert np.array_equal(back.view(np.uint64), a.view(np.uint64))


def test_numpy_reads_our_files(tmp_path, rng):
    a = rng.standard_normal((3, 9))
    path = tmp_path / "a.npy"
    save_array(path, a)
    np.testing.assert_array_equal(np.load(path), a)


def test_we_read_numpy_files(tmp_path, rng):
    a = rng.standard_normal((4, 4))
    path = tmp_path / "a.npy"
    np.save(path, a)
    np.testing.assert_array_equal(load_array(path), a)


def test_save_rejects_empty(tmp_path):
    path = tmp_path / "a.npy"
    with pytest.raises(ShapeError):
        save_array(path, np.empty((0, 3)))
    assert not path.exists()


def test_load_rejects_empty_shape(tmp_path):
    path = tmp_path / "a.npy"
    np.save(path, np.empty((0, 3)))
    with pytest.raises(ShapeError):
        load_array(path)


def test_load_rejects_one_dimensional(tmp_path):
    path = tmp_path / "a.npy"
    np.save(path, np.zeros(5))
    with pytest.raises(FormatError, match="2-tuple"):
        load_array(path)


def test_wrong_magic(tmp_path):
    path = tmp_path / "a.npy"
    path.write_bytes(b"NOTNPY" + b"\x00" * 64)
    with pytest.raises(FormatError, match="offset 0"):
        load_array(path)


def test_unsupported_version(tmp_path, rng):
    path = tmp_path / "a.npy"
    with open(path, "wb") as fh:
        np.lib.format.write_array(fh, rng.standard_normal((2, 2)), version=(2, 0))
    with pytest.raises(FormatError, match="offset 6"):
        load_array(path)


def test_dtype_mismatch(tmp_path, rng):
    path = tmp_path / "a.npy"
    np.save(path, rng.standard_normal((2, 2)).astype(np.float32))
    with pytest.raises(FormatError, match="dtype mismatch"):
        load_array(path)


def test_fortran_order_rejected(tmp_path, rng):
    path = tmp_path / "a.npy"
    np.save(path, np.asfortranarray(rng.standard_normal((3, 4))))
    with pytest.raises(FormatError, match="Fortran"):
        load_array(path)


def test_truncated_payload_reports_offset(tmp_path, rng):
    path = tmp_path / "a.npy"
    save_array(path, rng.standard_normal((4, 4)))
    blob = path.read_bytes()
    path.write_bytes(blob[:-24])
    with pytest.raises(FormatError, match=f"offset {len(blob) - 24}"):
        load_array(path)


def test_trailing_bytes_rejected(tmp_path, rng):
    path = tmp_path / "a.npy"
    save_array(path, rng.standard_normal((2, 2)))
    path.write_bytes(path.read_bytes() + b"junk")
    with pytest.raises(FormatError, match="trailing"):
        load_array(path)


def test_malformed_header(tmp_path, rng):
    path = tmp_path / "a.npy"
    save_array(path, rng.standard_normal((2, 2)))
    blob = bytearray(path.read_bytes())
    blob[12:17] = b"?????"
    path.write_bytes(bytes(blob))
    with pytest.raises(FormatError, match="header"):
        load_array(path)


def test_non_finite_payload_rejected(tmp_path):
    path = tmp_path / "a.npy"
    np.save(path, np.array([[1.0, np.nan]]))
    with pytest.raises(ParameterError, match="non-finite"):
        load_array(path)


def test_save_rejects_non_finite(tmp_path):
    path = tmp_path / "a.npy"
    with pytest.raises(ParameterError):
        save_array(path, np.array([[np.inf, 1.0]]))
    assert not path.exists()
