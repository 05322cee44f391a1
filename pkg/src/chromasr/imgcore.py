"""Color image container, bicubic resampling and the degradation operator.

Resampling follows the MATLAB ``imresize`` convention: Keys cubic kernel with
a = -0.5, kernel support widened by 1/scale when downscaling with
antialiasing, and replicate (clamp-to-edge) boundary handling. Every resize is
separable and represented by one dense weight matrix per axis, which makes
the adjoint an exact matrix transpose.
"""
from dataclasses import dataclass
from functools import lru_cache
import math
import struct

import numpy as np

from . import kernels
from .errors import ConfigError, InvalidArgumentError

KEYS_A = -0.5
FIXTURE_MAGIC = b"CSR1"
_FIXTURE_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True, eq=False)
class ColorImage:
    """Planar RGB image, shape (3, height, width), float64 on a [0, 255] scale.

    The plane array is made read-only on construction so instances can be
    shared between workers.
    """

    planes: np.ndarray

    def __post_init__(self):
        p = np.array(self.planes, dtype=np.float64, copy=True, order="C")
        if p.ndim != 3 or p.shape[0] != 3:
            raise InvalidArgumentError(f"expected planes of shape (3, H, W), got {p.shape}")
        if p.shape[1] < 1 or p.shape[2] < 1:
            raise InvalidArgumentError("image must be non-empty")
        p.setflags(write=False)
        object.__setattr__(self, "planes", p)

    @classmethod
    def from_hwc(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidArgumentError(f"expected (H, W, 3) array, got {arr.shape}")
        return cls(arr.transpose(2, 0, 1))

    @classmethod
    def constant(cls, height, width, value):
        return cls(np.full((3, height, width), float(value)))

    def to_hwc(self):
        return self.planes.transpose(1, 2, 0).copy()

    @property
    def height(self):
        return self.planes.shape[1]

    @property
    def width(self):
        return self.planes.shape[2]

    @property
    def shape(self):
        return self.planes.shape

    def __repr__(self):
        return f"ColorImage({self.width}x{self.height})"


@dataclass(frozen=True)
class PatchIndex:
    row: int
    col: int
    scale_level: int = 0


# ----------------------------------------------------------------------------
# resampling


def keys_cubic(x, a=KEYS_A):
    """Keys cubic convolution kernel."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    ax2 = ax * ax
    ax3 = ax2 * ax
    near = (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0
    far = a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a
    return np.where(ax <= 1.0, near, np.where(ax <= 2.0, far, 0.0))


@lru_cache(maxsize=256)
def _axis_weights(in_len, out_len, scale, antialias):
    if scale < 1.0 and antialias:
        width = 4.0 / scale

        def kern(x):
            return scale * keys_cubic(scale * x)
    else:
        width = 4.0
        kern = keys_cubic

    x = np.arange(1, out_len + 1, dtype=np.float64)
    u = x / scale + 0.5 * (1.0 - 1.0 / scale)
    left = np.floor(u - width / 2.0)
    taps = int(math.ceil(width)) + 2
    idx = left[:, None] + np.arange(taps)[None, :]
    w = kern(u[:, None] - idx)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 1, in_len).astype(np.int64) - 1

    mat = np.zeros((out_len, in_len))
    rows = np.repeat(np.arange(out_len), taps)
    np.add.at(mat, (rows, idx.ravel()), w.ravel())
    mat.setflags(write=False)
    return mat


def resize_matrix(in_len, out_len, antialias=True, scale=None):
    """Dense (out_len, in_len) interpolation matrix for one axis."""
    if scale is None:
        scale = out_len / in_len
    return _axis_weights(int(in_len), int(out_len), float(scale), bool(antialias))


def _apply_separable(planes, row_mat, col_mat):
    return np.einsum("ij,cjk,lk->cil", row_mat, planes, col_mat, optimize=True)


def bicubic_resize(img, target_w, target_h, antialias=True):
    if target_w < 1 or target_h < 1:
        raise InvalidArgumentError(f"target size must be positive, got {target_w}x{target_h}")
    if (target_w, target_h) == (img.width, img.height):
        return img
    rm = resize_matrix(img.height, target_h, antialias)
    cm = resize_matrix(img.width, target_w, antialias)
    return ColorImage(_apply_separable(img.planes, rm, cm))


def upscale(img, factor):
    return bicubic_resize(img, img.width * factor, img.height * factor)


@dataclass(frozen=True)
class DegradationModel:
    """Fused blur + decimation: antialiased bicubic downscale by ``factor``.

    Inputs whose size is not a multiple of ``factor`` are replicate-padded
    first; the padding is folded into the axis matrices so :meth:`degrade`
    stays linear with an exact adjoint.
    """

    factor: int = 3
    antialias: bool = True

    def __post_init__(self):
        if int(self.factor) != self.factor or self.factor < 2:
            raise InvalidArgumentError(f"degradation factor must be an integer >= 2, got {self.factor}")

    def lr_size(self, hr_len):
        return -(-hr_len // self.factor)

    def padding(self, hr_len):
        return self.lr_size(hr_len) * self.factor - hr_len

    def axis_matrix(self, hr_len):
        return _degrade_axis(int(hr_len), int(self.factor), bool(self.antialias))


@lru_cache(maxsize=64)
def _degrade_axis(hr_len, factor, antialias):
    lr_len = -(-hr_len // factor)
    padded = lr_len * factor
    mat = np.array(resize_matrix(padded, lr_len, antialias, scale=1.0 / factor))
    if padded > hr_len:
        # replicate padding: padded samples alias the last real sample
        mat[:, hr_len - 1] += mat[:, hr_len:].sum(axis=1)
        mat = mat[:, :hr_len].copy()
    mat.setflags(write=False)
    return mat


def degrade(hr, model):
    rm = model.axis_matrix(hr.height)
    cm = model.axis_matrix(hr.width)
    return ColorImage(_apply_separable(hr.planes, rm, cm))


def degrade_adjoint(lr, model, hr_shape=None):
    """Transpose of :func:`degrade`. ``hr_shape`` = (height, width) of the HR
    grid; defaults to ``factor`` times the LR size."""
    if hr_shape is None:
        hr_shape = (lr.height * model.factor, lr.width * model.factor)
    hh, hw = hr_shape
    rm = model.axis_matrix(hh)
    cm = model.axis_matrix(hw)
    if rm.shape[0] != lr.height or cm.shape[0] != lr.width:
        raise InvalidArgumentError(f"LR size {lr.height}x{lr.width} does not match HR grid {hh}x{hw}")
    return ColorImage(_apply_separable(lr.planes, rm.T, cm.T))


def degrade_planes(planes, model):
    """Array-level degrade on a (..., H, W) stack; used inside solvers."""
    rm = model.axis_matrix(planes.shape[-2])
    cm = model.axis_matrix(planes.shape[-1])
    return rm @ planes @ cm.T


def degrade_adjoint_planes(planes, model, hr_shape):
    rm = model.axis_matrix(hr_shape[0])
    cm = model.axis_matrix(hr_shape[1])
    return rm.T @ planes @ cm


# ----------------------------------------------------------------------------
# patches


def _check_patch(height, width, row, col, m_side):
    if row < 0 or col < 0 or row + m_side > height or col + m_side > width:
        raise InvalidArgumentError(
            f"patch at ({row}, {col}) of side {m_side} lies outside {height}x{width} image"
        )


def block_to_vector(block):
    """(3, m, m) pixel block -> stacked [r; g; b] vector, column-major per channel."""
    return np.ascontiguousarray(block.transpose(0, 2, 1)).reshape(-1)


def vector_to_block(vec, m_side):
    return np.asarray(vec, dtype=np.float64).reshape(3, m_side, m_side).transpose(0, 2, 1)


def blocks_to_matrix(blocks):
    """(n, 3, m, m) blocks -> (3m, n) matrix of stacked column vectors."""
    n = blocks.shape[0]
    return np.ascontiguousarray(blocks.transpose(0, 1, 3, 2).reshape(n, -1).T)


def matrix_to_blocks(mat, m_side):
    n = mat.shape[1]
    return np.ascontiguousarray(mat.T.reshape(n, 3, m_side, m_side).transpose(0, 1, 3, 2))


def extract_stacked_patch(img, idx, m_side):
    _check_patch(img.height, img.width, idx.row, idx.col, m_side)
    block = img.planes[:, idx.row:idx.row + m_side, idx.col:idx.col + m_side]
    return block_to_vector(block)


def new_canvas(height, width):
    return np.zeros((3, height, width)), np.zeros((height, width))


def place_patch_accumulate(canvas, weights, idx, patch):
    """Add one stacked patch into ``canvas`` (3, H, W) and bump the overlap
    counts in ``weights`` (H, W). Both arrays are modified in place and
    returned."""
    m2 = len(patch) // 3
    m_side = math.isqrt(m2)
    if 3 * m_side * m_side != len(patch):
        raise InvalidArgumentError(f"patch length {len(patch)} is not 3 * side^2")
    _check_patch(canvas.shape[1], canvas.shape[2], idx.row, idx.col, m_side)
    block = vector_to_block(patch, m_side)[None]
    kernels.accumulate_patches(canvas, weights, [idx.row], [idx.col], block)
    return canvas, weights


def normalize_canvas(canvas, weights):
    if np.any(weights <= 0):
        raise InvalidArgumentError("canvas has uncovered pixels")
    return ColorImage(canvas / weights[None])


def patch_positions(length, m_side, stride):
    """Top-left coordinates on a stride grid, always including the last
    valid position so the border is covered."""
    last = length - m_side
    pos = list(range(0, last + 1, stride))
    if pos[-1] != last:
        pos.append(last)
    return pos


# ----------------------------------------------------------------------------
# pyramid


def build_pyramid(img, ratio, levels, patch_side=6):
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"pyramid ratio must lie in (0, 1), got {ratio}", ["pyramid_ratio"])
    if levels < 0:
        raise ConfigError(f"pyramid levels must be >= 0, got {levels}", ["pyramid_levels"])
    out = [img]
    for i in range(1, levels + 1):
        h = int(round(img.height * ratio ** i))
        w = int(round(img.width * ratio ** i))
        if h < patch_side or w < patch_side:
            raise ConfigError(
                f"pyramid level {i} is {w}x{h}, smaller than the {patch_side}px patch",
                ["pyramid_levels"],
            )
        out.append(bicubic_resize(img, w, h, antialias=True))
    return out


# ----------------------------------------------------------------------------
# I/O


def read_image(path):
    from PIL import Image

    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return ColorImage.from_hwc(arr)


def to_uint8(img):
    return np.clip(np.rint(img.to_hwc()), 0, 255).astype(np.uint8)


def write_png(img, path):
    from PIL import Image

    Image.fromarray(to_uint8(img), mode="RGB").save(path, format="PNG")


def write_fixture(img, path):
    """Little-endian float64 planes after a 16-byte header: magic, width,
    height, channel count (uint32 each)."""
    with open(path, "wb") as fh:
        fh.write(_FIXTURE_HEADER.pack(FIXTURE_MAGIC, img.width, img.height, 3))
        fh.write(img.planes.astype("<f8").tobytes())


def read_fixture(path):
    with open(path, "rb") as fh:
        head = fh.read(_FIXTURE_HEADER.size)
        if len(head) != _FIXTURE_HEADER.size:
            raise InvalidArgumentError(f"{path}: truncated header")
        magic, width, height, channels = _FIXTURE_HEADER.unpack(head)
        if magic != FIXTURE_MAGIC:
            raise InvalidArgumentError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != channels * width * height:
        raise InvalidArgumentError(f"{path}: payload has {data.size} values, expected {channels * width * height}")
    return ColorImage(data.reshape(channels, height, width))
