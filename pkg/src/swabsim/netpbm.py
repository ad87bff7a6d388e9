"""Minimal portable graymap (PGM) reader/writer, ASCII (P2) and binary (P5)."""
import numpy as np

from .errors import InputError


def write_pgm(path, data, maxval=255, binary=True):
    """Write a 2D array of integers in ``[0, maxval]`` as a PGM file.

    16-bit binary rasters are big-endian as the format requires.
    """
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise InputError(f"PGM data must be 2D, got shape {arr.shape}")
    if not 0 < maxval < 65536:
        raise InputError(f"maxval must be in [1, 65535], got {maxval}")
    arr = np.rint(arr).astype(np.int64)
    if arr.min(initial=0) < 0 or arr.max(initial=0) > maxval:
        raise InputError(f"PGM values must lie in [0, {maxval}]")
    height, width = arr.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            if binary:
                dtype = ">u2" if maxval > 255 else "u1"
                fh.write(arr.astype(dtype).tobytes())
            else:
                for row in arr:
                    fh.write((" ".join(str(int(x)) for x in row) + "\n").encode("ascii"))
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from exc


def _tokens(buf, pos, count):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    out = []
    n = len(buf)
    while len(out) < count:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise InputError("truncated PGM header")
        out.append(buf[start:pos])
    return out, pos


def read_pgm(path):
    """Return ``(array, maxval)`` from a P2 or P5 file; array is ``uint16``."""
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    (magic, w, h, maxval), pos = _tokens(buf, 0, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise InputError(f"{path}: malformed PGM header") from exc
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = ">u2" if maxval > 255 else "u1"
        count = width * height
        raw = np.frombuffer(buf, dtype=dtype, count=count, offset=pos) if len(buf) - pos >= count * np.dtype(dtype).itemsize else None
        if raw is None:
            raise InputError(f"{path}: truncated P5 raster")
        arr = raw.reshape(height, width).astype(np.uint16)
    elif magic == b"P2":
        values = buf[pos:].split()
        if len(values) < width * height:
            raise InputError(f"{path}: truncated P2 raster")
        arr = np.array([int(v) for v in values[: width * height]], dtype=np.uint16).reshape(height, width)
    else:
        raise InputError(f"{path}: unsupported magic {magic!r}")
    return arr, maxval
