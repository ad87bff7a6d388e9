import numpy as np
import pytest

from swabsim.errors import InputError
from swabsim.netpbm import read_pgm, write_pgm


@pytest.mark.parametrize("binary", [True, False])
@pytest.mark.parametrize("maxval", [255, 65535])
def test_round_trip(tmp_path, rng, binary, maxval):
    data = rng.integers(0, maxval + 1, size=(7, 11))
    write_pgm(tmp_path / "a.pgm", data, maxval, binary)
    back, mv = read_pgm(tmp_path / "a.pgm")
    assert mv == maxval and np.array_equal(back, data)


def test_sixteen_bit_is_big_endian(tmp_path):
    write_pgm(tmp_path / "b.pgm", [[258]], 65535)
    assert (tmp_path / "b.pgm").read_bytes().endswith(b"\x01\x02")


def test_header_comments_skipped(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P2\n# made by hand\n2 1\n# max\n9\n3 9\n")
    data, mv = read_pgm(tmp_path / "c.pgm")
    assert mv == 9 and data.tolist() == [[3, 9]]


def test_bad_inputs(tmp_path):
    with pytest.raises(InputError):
        write_pgm(tmp_path / "d.pgm", [[300]], 255)
    with pytest.raises(InputError):
        write_pgm(tmp_path / "d.pgm", [1, 2, 3])
    (tmp_path / "e.pgm").write_bytes(b"P5\n4 4\n255\n\x00")
    with pytest.raises(InputError):
        read_pgm(tmp_path / "e.pgm")


def test_io_errors_name_the_path(tmp_path):
    with pytest.raises(InputError, match="missing.pgm"):
        read_pgm(tmp_path / "missing.pgm")
    with pytest.raises(InputError, match=str(tmp_path)):
        write_pgm(tmp_path, [[1]])
