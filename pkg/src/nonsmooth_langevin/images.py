"""Image plumbing for the imaging experiments.

Binary PGM read/write with pixel values mapped to [0, 1], a piecewise
constant synthetic phantom with known jump edges, and generation of noisy
or blurred-and-noisy observations from a ground truth.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import binary_dilation

from .linops import convolve2d_periodic

__all__ = [
    "gaussian_kernel",
    "phantom_image",
    "edge_masks",
    "read_image_pgm",
    "write_image_pgm",
    "make_synthetic_data",
]


def gaussian_kernel(size=5, std=1.0):
    """Odd-sized square Gaussian kernel normalized to sum 1."""
    if size < 1 or size % 2 == 0:
        raise ValueError("kernel size must be odd and positive")
    if std <= 0:
        raise ValueError("std must be positive")
    r = np.arange(size) - size // 2
    g = np.exp(-0.5 * (r / std) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


def phantom_image(size=64):
    """Piecewise constant test image in [0, 1].

    A dark background with a brighter rectangle, a bright disk, two
    one-pixel-wide diagonal stripes, and a few isolated pinhole points.
    The stripes and pinholes sit obliquely to the pixel axes, so an
    anisotropic total-variation prior leaves them loosely constrained;
    together with the block edges they make edge-versus-interior variance
    comparisons well defined.
    """
    if size < 8:
        raise ValueError("phantom needs size >= 8")
    img = np.full((size, size), 0.25)
    img[size // 8 : size // 2, size // 6 : size // 2] = 0.75
    ii, jj = np.mgrid[0:size, 0:size]
    disk = (ii - 0.7 * size) ** 2 + (jj - 0.65 * size) ** 2 <= (size / 5.0) ** 2
    img[disk] = 1.0

    def put(r, c, value):
        if 0 <= r < size and 0 <= c < size:
            img[r, c] = value

    for i in range(size * 7 // 16):
        put(size // 2 + i, 2 + i, 0.75)
    for i in range(size * 13 // 32):
        put(size // 16 + i, size - 4 - i, 0.55)
    put(size // 8, size * 11 // 16, 0.75)
    put(size // 4, size * 13 // 16, 0.75)
    put(size * 3 // 8, size * 11 // 16, 0.75)
    put(size * 7 // 16, size * 7 // 8, 0.75)
    return img


def edge_masks(truth, jump_tol=0.05, margin=2):
    """Boolean masks (edge pixels, flat interior pixels) of a piecewise image.

    A pixel is an edge pixel when any 4-neighbor differs by more than
    ``jump_tol``.  Flat-interior pixels are those farther than ``margin``
    (Chebyshev) from every edge pixel and from the image border; border
    pixels carry fewer difference constraints and behave differently from
    true interior ones.
    """
    truth = np.asarray(truth, dtype=float)
    jump = np.zeros(truth.shape, dtype=bool)
    jump[:-1, :] |= np.abs(truth[1:, :] - truth[:-1, :]) > jump_tol
    jump[1:, :] |= np.abs(truth[1:, :] - truth[:-1, :]) > jump_tol
    jump[:, :-1] |= np.abs(truth[:, 1:] - truth[:, :-1]) > jump_tol
    jump[:, 1:] |= np.abs(truth[:, 1:] - truth[:, :-1]) > jump_tol
    struct = np.ones((2 * margin + 1, 2 * margin + 1), dtype=bool)
    flat = ~binary_dilation(jump, structure=struct)
    if margin > 0:
        flat[:margin, :] = flat[-margin:, :] = False
        flat[:, :margin] = flat[:, -margin:] = False
    return jump, flat


def _read_tokens(data, count):
    """First ``count`` whitespace-separated header tokens, skipping
    # comments; returns (tokens, offset of the byte after the last
    separator)."""
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:i])
    return tokens, i + 1


def read_image_pgm(path):
    """Read a binary (P5) PGM as floats in [0, 1]."""
    with open(path, "rb") as f:
        data = f.read()
    tokens, offset = _read_tokens(data, 4)
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM file: magic {tokens[0]!r}")
    width, height, maxval = (int(t) for t in tokens[1:])
    if width < 1 or height < 1:
        raise ValueError("bad PGM dimensions")
    if not 0 < maxval < 65536:
        raise ValueError(f"unsupported PGM maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    try:
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    except ValueError as exc:
        raise ValueError("PGM pixel data truncated") from exc
    return raw.reshape(height, width).astype(float) / maxval


def write_image_pgm(path, img, maxval=65535):
    """Write floats as binary PGM, clamping to [0, 1] before quantization."""
    if not 0 < maxval < 65536:
        raise ValueError(f"unsupported PGM maxval {maxval}")
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("expected a 2D image")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n{maxval}\n".encode())
        f.write(q.astype(dtype).tobytes())


def make_synthetic_data(kind, truth, sigma, kernel=None, seed=0):
    """Observation from a ground truth: noise only, or blur plus noise.

    kind "denoise" adds N(0, sigma^2) pixel noise; kind "deconv" first
    applies periodic convolution with ``kernel``.  Deterministic for a
    fixed seed.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    truth = np.asarray(truth, dtype=float)
    if kind == "denoise":
        clean = truth
    elif kind == "deconv":
        if kernel is None:
            raise ValueError("deconv needs a kernel")
        clean = convolve2d_periodic(truth, kernel)
    else:
        raise ValueError(f"unknown data kind {kind!r}")
    if sigma == 0:
        return clean.copy()
    rng = np.random.Generator(np.random.Philox(seed))
    return clean + sigma * rng.standard_normal(truth.shape)
