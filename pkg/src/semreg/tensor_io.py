"""Binary tensor (STF) and Netpbm raster I/O.

Every other module consumes plain numpy arrays produced here, so the engine
stays decoupled from whatever framework produced the feature maps.

STF layout (little-endian, bit-exact on every platform):

    magic "STF1" | dtype code u8 (0=f32, 1=u8) | ndim u8 | dims as u64[ndim]
    | payload, row-major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"STF1"

_DTYPE_CODES = {np.dtype("<f4"): 0, np.dtype("u1"): 1}
_CODE_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("u1")}


class TensorIOError(Exception):
    """Raised for malformed STF or Netpbm files; message names the path."""


@dataclass
class RasterImage:
    """8-bit image, row-major; channels is 1 (gray) or 3 (RGB)."""

    width: int
    height: int
    channels: int
    pixels: np.ndarray  # (height, width) or (height, width, 3), uint8

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        expected = (self.height, self.width) if self.channels == 1 else (
            self.height, self.width, 3)
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != expected:
            raise ValueError(
                f"pixel buffer shape {self.pixels.shape} != {expected}")


def _as_tensor(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.ndim == 0 or any(d < 1 for d in arr.shape):
        raise ValueError(f"tensor dims must be nonempty with extents >= 1, got {arr.shape}")
    if arr.dtype == np.uint8:
        return np.ascontiguousarray(arr)
    return np.ascontiguousarray(arr, dtype="<f4")


def write_tensor(arr: np.ndarray, path) -> None:
    """Write a float32 or uint8 array as an STF file."""
    arr = _as_tensor(arr)
    code = _DTYPE_CODES[arr.dtype.newbyteorder("<")]
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<BB", code, arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            f.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())
    except OSError as e:
        raise TensorIOError(f"cannot write tensor to {path}: {e}") from e


def read_tensor(path) -> np.ndarray:
    """Read an STF file back into a numpy array (inverse of write_tensor)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise TensorIOError(f"cannot read tensor from {path}: {e}") from e
    if raw[:4] != MAGIC:
        raise TensorIOError(f"{path}: not an STF file")
    if len(raw) < 6:
        raise TensorIOError(f"{path}: truncated header")
    code, ndim = struct.unpack_from("<BB", raw, 4)
    if code not in _CODE_DTYPES:
        raise TensorIOError(f"{path}: unsupported dtype code {code}")
    header_end = 6 + 8 * ndim
    if len(raw) < header_end:
        raise TensorIOError(f"{path}: truncated header")
    dims = struct.unpack_from(f"<{ndim}Q", raw, 6)
    dtype = _CODE_DTYPES[code]
    count = int(np.prod(dims, dtype=np.int64))
    expected = header_end + count * dtype.itemsize
    if len(raw) != expected:
        raise TensorIOError(
            f"{path}: size mismatch, expected {expected} bytes, got {len(raw)}")
    data = np.frombuffer(raw, dtype=dtype, offset=header_end, count=count)
    return data.reshape(dims).copy()


def write_image(img: RasterImage, path) -> None:
    """Write binary PGM (1 channel) or PPM (3 channels), maxval 255."""
    kind = b"P5" if img.channels == 1 else b"P6"
    try:
        with open(path, "wb") as f:
            f.write(kind + b"\n%d %d\n255\n" % (img.width, img.height))
            f.write(img.pixels.tobytes())
    except OSError as e:
        raise TensorIOError(f"cannot write image to {path}: {e}") from e


def read_image(path) -> RasterImage:
    """Read a binary PGM/PPM file written by write_image (or any P5/P6)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise TensorIOError(f"cannot read image from {path}: {e}") from e

    magic = raw[:2]
    if magic not in (b"P5", b"P6"):
        raise TensorIOError(f"{path}: unsupported format {magic!r}, need P5 or P6")
    channels = 1 if magic == b"P5" else 3

    # header tokens: width, height, maxval; '#' comments allowed per Netpbm
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TensorIOError(f"{path}: truncated header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval

    width, height, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise TensorIOError(f"{path}: maxval must be 255, got {maxval}")
    count = width * height * channels
    if len(raw) - pos != count:
        raise TensorIOError(
            f"{path}: size mismatch, expected {count} payload bytes, "
            f"got {len(raw) - pos}")
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=pos, count=count)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return RasterImage(width, height, channels, pixels.reshape(shape).copy())
