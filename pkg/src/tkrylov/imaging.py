"""Image and video-frame I/O, synthetic test images, noise injection and metrics.

Images are float arrays of shape ``(n1, n2, 3)`` on a linear [0, 1] scale;
they are clamped only when written to 8-bit files. Such an array already is
the n1×n2×3 tensor used by the solvers. A sequence of ``k`` frames becomes an
n1×n2×3k tensor with channel ``c`` of frame ``f`` (0-based) at slice ``3f + c``.
"""

import re
from pathlib import Path

import numpy as np

from .tensor_core import as_tensor3, frob_norm

__all__ = [
    "add_noise",
    "snr",
    "relative_error",
    "load_ppm",
    "save_ppm",
    "image_to_tensor",
    "tensor_to_image",
    "frames_to_tensor",
    "tensor_to_frames",
    "load_frames",
    "save_frames",
    "synth_image",
    "SYNTH_KINDS",
]

SYNTH_KINDS = ("checker", "gradient", "disks")
FRAME_PATTERN = "frame_{:04d}.ppm"


def add_noise(C_hat, nu, seed=None):
    """Return ``(C, eps)`` with ``C = C_hat + N`` and ``||N|| = nu ||C_hat||`` exactly.

    ``N`` is a standard normal draw rescaled to the target norm.
    """
    C_hat = np.asarray(C_hat, dtype=np.float64)
    if nu < 0:
        raise ValueError("noise level must be nonnegative")
    if nu == 0:
        return C_hat.copy(), 0.0
    rng = np.random.default_rng(seed)
    G = rng.standard_normal(C_hat.shape)
    N = (nu * frob_norm(C_hat) / frob_norm(G)) * G
    return C_hat + N, frob_norm(N)


def snr(X_restored, X_hat):
    """Signal-to-noise ratio in dB, relative to the mean level of ``X_hat``."""
    X_restored = np.asarray(X_restored, dtype=np.float64)
    X_hat = np.asarray(X_hat, dtype=np.float64)
    if X_restored.shape != X_hat.shape:
        raise ValueError("shape mismatch")
    err = np.sum((X_restored - X_hat) ** 2)
    if err == 0:
        return float("inf")
    return float(10.0 * np.log10(np.sum((X_hat - X_hat.mean()) ** 2) / err))


def relative_error(X_restored, X_hat):
    X_restored = np.asarray(X_restored, dtype=np.float64)
    X_hat = np.asarray(X_hat, dtype=np.float64)
    if X_restored.shape != X_hat.shape:
        raise ValueError("shape mismatch")
    ref = frob_norm(X_hat)
    if ref == 0:
        raise ValueError("reference tensor is zero")
    return frob_norm(X_hat - X_restored) / ref


_HEADER = re.compile(rb"\AP6\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def load_ppm(path):
    """Read a binary (P6) PPM with maxval 255 into an ``(h, w, 3)`` float image."""
    raw = Path(path).read_bytes()
    match = _HEADER.match(raw)
    if not match:
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    w, h, maxval = (int(g) for g in match.groups())
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    body = raw[match.end():]
    if len(body) < w * h * 3:
        raise ValueError(f"{path}: truncated pixel data")
    pix = np.frombuffer(body, dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)
    return pix.astype(np.float64) / 255.0


def save_ppm(img, path):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got {img.shape}")
    q = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w, _ = q.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(q.tobytes())


def image_to_tensor(img):
    T = as_tensor3(img, "image")
    if T.shape[2] != 3:
        raise ValueError("an RGB image has exactly 3 channels")
    return T.copy()


def tensor_to_image(T):
    T = as_tensor3(T)
    if T.shape[2] != 3:
        raise ValueError("an RGB image has exactly 3 channels")
    return T.copy()


def frames_to_tensor(frames):
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    if not frames:
        raise ValueError("no frames given")
    shape = frames[0].shape
    if len(shape) != 3 or shape[2] != 3:
        raise ValueError(f"frames must be (h, w, 3) images, got {shape}")
    if any(f.shape != shape for f in frames):
        raise ValueError("frames have inconsistent sizes")
    return np.concatenate(frames, axis=2)


def tensor_to_frames(T):
    T = as_tensor3(T)
    if T.shape[2] % 3:
        raise ValueError("slice count is not a multiple of 3")
    return [T[:, :, 3 * f:3 * f + 3].copy() for f in range(T.shape[2] // 3)]


def load_frames(directory):
    paths = sorted(Path(directory).glob("frame_*.ppm"))
    if not paths:
        raise ValueError(f"{directory}: no frame_NNNN.ppm files")
    return [load_ppm(p) for p in paths]


def save_frames(frames, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames, start=1):
        save_ppm(frame, directory / FRAME_PATTERN.format(i))


def synth_image(kind, n, seed=0):
    """Deterministic structured test image with different content per channel."""
    if n < 8:
        raise ValueError("synthetic images need n >= 8")
    if kind not in SYNTH_KINDS:
        raise ValueError(f"unknown synthetic image {kind!r}; choose from {SYNTH_KINDS}")
    rng = np.random.default_rng(seed)
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    if kind == "checker":
        block = max(1, n // 8)
        base = ((ii // block + jj // block) % 2).astype(float)
        img = np.stack([base, 1.0 - base, 0.5 + 0.5 * base * (ii < n // 2)], axis=2)
    elif kind == "gradient":
        x, y = ii / (n - 1), jj / (n - 1)
        img = np.stack([x, y, 0.5 * (1 - x) + 0.5 * np.sin(np.pi * y) ** 2], axis=2)
    else:
        img = np.full((n, n, 3), 0.1)
        for _ in range(6):
            ci, cj = rng.uniform(0.15, 0.85, size=2) * n
            rad = rng.uniform(0.08, 0.22) * n
            color = rng.uniform(0.2, 1.0, size=3)
            mask = (ii - ci) ** 2 + (jj - cj) ** 2 <= rad**2
            img[mask] = color
    return img
