"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Every kernel exists twice: ``<name>_numpy`` (vectorized numpy) and
``<name>_numba`` (an ``@njit`` loop nest). The public ``<name>`` is bound to
one of them at import time. Set ``FREQPIX_NO_NUMBA=1`` to force the numpy
path; it is also used automatically when numba cannot be imported.

Both paths compute the same arithmetic in the same operation order where
exactness matters (blending endpoints); elsewhere they agree to rounding.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("FREQPIX_NO_NUMBA", "").strip() in ("", "0")

BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(func):
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------------------
# naive 2D DFT (quadratic-time oracle)


def _twiddles(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    n = height * width
    m = np.arange(n, dtype=np.float64)
    ang = -2.0 * np.pi * m / n
    return np.cos(ang), np.sin(ang)


def naive_dft2_numpy(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    H, W = grid.shape
    cos_t, sin_t = _twiddles(H, W)
    h = np.arange(H)
    w = np.arange(W)
    # exponent numerator (h*u*W + w*v*H) mod HW, indexed [u, v, h, w]
    m = (
        (h[None, None, :, None] * h[:, None, None, None] * W)
        + (w[None, None, None, :] * w[None, :, None, None] * H)
    ) % (H * W)
    re = np.sum(grid[None, None, :, :] * cos_t[m], axis=(2, 3))
    im = np.sum(grid[None, None, :, :] * sin_t[m], axis=(2, 3))
    return re + 1j * im


def _naive_dft2_loop(grid, cos_t, sin_t):
    H, W = grid.shape
    n = H * W
    out = np.empty((H, W), dtype=np.complex128)
    for u in range(H):
        for v in range(W):
            re = 0.0
            im = 0.0
            for h in range(H):
                for w in range(W):
                    m = (h * u * W + w * v * H) % n
                    x = grid[h, w]
                    re += x * cos_t[m]
                    im += x * sin_t[m]
            out[u, v] = complex(re, im)
    return out


_naive_dft2_jit = _njit(_naive_dft2_loop)


def naive_dft2_numba(grid: np.ndarray) -> np.ndarray:
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    cos_t, sin_t = _twiddles(*grid.shape)
    return _naive_dft2_jit(grid, cos_t, sin_t)


# ---------------------------------------------------------------------------
# crop-restricted amplitude mixing fused with phase-preserving recomposition
#
# Inputs are natural-layout spectra shaped (C, H, W). The crop is given in
# DC-centered coordinates; centered index c maps to natural (c - n//2) mod n.


def mix_spectrum_numpy(f1, f2, lam, top, left, side_h, side_w):
    _, H, W = f1.shape
    rows = (np.arange(top, top + side_h) - H // 2) % H
    cols = (np.arange(left, left + side_w) - W // 2) % W
    ix = np.ix_(np.arange(f1.shape[0]), rows, cols)
    s1 = f1[ix]
    a1 = np.abs(s1)
    a2 = np.abs(f2[ix])
    am = (1.0 - lam) * a1 + lam * a2
    nz = a1 > 0.0
    scale = np.divide(am, a1, out=np.zeros_like(am), where=nz)
    region = np.where(nz, s1 * scale, am + 0j)
    out = f1.copy()
    out[ix] = region
    return out


def _mix_spectrum_loop(f1, f2, lam, top, left, side_h, side_w):
    C, H, W = f1.shape
    out = f1.copy()
    for c in range(C):
        for i in range(top, top + side_h):
            r = (i - H // 2) % H
            for j in range(left, left + side_w):
                k = (j - W // 2) % W
                z1 = f1[c, r, k]
                z2 = f2[c, r, k]
                a1 = math.hypot(z1.real, z1.imag)
                a2 = math.hypot(z2.real, z2.imag)
                am = (1.0 - lam) * a1 + lam * a2
                if a1 > 0.0:
                    s = am / a1
                    out[c, r, k] = complex(z1.real * s, z1.imag * s)
                else:
                    out[c, r, k] = complex(am, 0.0)
    return out


mix_spectrum_numba = _njit(_mix_spectrum_loop)


# ---------------------------------------------------------------------------
# two-stage blend: clamp((1-l2)*xf + l2*((1-l1)*x1 + l1*x2))


def blend_fuse_numpy(xf, x1, x2, lambda1, lambda2):
    xp = (1.0 - lambda1) * x1 + lambda1 * x2
    out = (1.0 - lambda2) * xf + lambda2 * xp
    return np.clip(out, 0.0, 1.0)


def _blend_fuse_loop(xf, x1, x2, lambda1, lambda2):
    H, W, C = x1.shape
    out = np.empty((H, W, C), dtype=np.float64)
    for i in range(H):
        for j in range(W):
            for c in range(C):
                xp = (1.0 - lambda1) * x1[i, j, c] + lambda1 * x2[i, j, c]
                v = (1.0 - lambda2) * xf[i, j, c] + lambda2 * xp
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                out[i, j, c] = v
    return out


blend_fuse_numba = _njit(_blend_fuse_loop)


# ---------------------------------------------------------------------------
# bilinear resize, half-pixel centers, edge clamped; (H, W, C) in and out


def _axis_weights(n_in: int, n_out: int):
    pos = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    i0 = np.floor(pos).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, pos - i0


def resize_numpy(x, new_h, new_w):
    r0, r1, fr = _axis_weights(x.shape[0], new_h)
    c0, c1, fc = _axis_weights(x.shape[1], new_w)
    fr = fr[:, None, None]
    fc = fc[None, :, None]
    top = x[r0][:, c0] * (1.0 - fc) + x[r0][:, c1] * fc
    bot = x[r1][:, c0] * (1.0 - fc) + x[r1][:, c1] * fc
    return top * (1.0 - fr) + bot * fr


def _resize_loop(x, r0, r1, fr, c0, c1, fc):
    new_h = r0.shape[0]
    new_w = c0.shape[0]
    C = x.shape[2]
    out = np.empty((new_h, new_w, C), dtype=np.float64)
    for i in range(new_h):
        a = fr[i]
        for j in range(new_w):
            b = fc[j]
            for c in range(C):
                top = x[r0[i], c0[j], c] * (1.0 - b) + x[r0[i], c1[j], c] * b
                bot = x[r1[i], c0[j], c] * (1.0 - b) + x[r1[i], c1[j], c] * b
                out[i, j, c] = top * (1.0 - a) + bot * a
    return out


_resize_jit = _njit(_resize_loop)


def resize_numba(x, new_h, new_w):
    r0, r1, fr = _axis_weights(x.shape[0], new_h)
    c0, c1, fc = _axis_weights(x.shape[1], new_w)
    return _resize_jit(np.ascontiguousarray(x, dtype=np.float64), r0, r1, fr, c0, c1, fc)


# ---------------------------------------------------------------------------
# L2-regularized logistic regression by full-batch gradient descent


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_fit_numpy(X, y, lr, epochs, l2):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(epochs):
        err = _sigmoid(X @ w + b) - y
        gw = X.T @ err / n + l2 * w
        gb = err.sum() / n
        w -= lr * gw
        b -= lr * gb
    return w, b


def _logistic_fit_loop(X, y, lr, epochs, l2):
    # products go through BLAS (np.dot); the elementwise passes are fused loops
    n, d = X.shape
    XT = np.ascontiguousarray(X.T)
    w = np.zeros(d)
    b = 0.0
    err = np.empty(n)
    for _ in range(epochs):
        z = np.dot(X, w)
        gb = 0.0
        for i in range(n):
            zi = z[i] + b
            if zi >= 0.0:
                p = 1.0 / (1.0 + math.exp(-zi))
            else:
                ez = math.exp(zi)
                p = ez / (1.0 + ez)
            err[i] = p - y[i]
            gb += err[i]
        gw = np.dot(XT, err)
        for k in range(d):
            w[k] -= lr * (gw[k] / n + l2 * w[k])
        b -= lr * (gb / n)
    return w, b


_logistic_fit_jit = _njit(_logistic_fit_loop)


def logistic_fit_numba(X, y, lr, epochs, l2):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return _logistic_fit_jit(X, y, float(lr), int(epochs), float(l2))


if USE_NUMBA:
    naive_dft2 = naive_dft2_numba
    mix_spectrum = mix_spectrum_numba
    blend_fuse = blend_fuse_numba
    resize = resize_numba
    logistic_fit = logistic_fit_numba
else:
    naive_dft2 = naive_dft2_numpy
    mix_spectrum = mix_spectrum_numpy
    blend_fuse = blend_fuse_numpy
    resize = resize_numpy
    logistic_fit = logistic_fit_numpy

IMPLEMENTATIONS = {
    "naive_dft2": (naive_dft2_numpy, naive_dft2_numba),
    "mix_spectrum": (mix_spectrum_numpy, mix_spectrum_numba),
    "blend_fuse": (blend_fuse_numpy, blend_fuse_numba),
    "resize": (resize_numpy, resize_numba),
    "logistic_fit": (logistic_fit_numpy, logistic_fit_numba),
}


def warmup() -> None:
    """Compile (or load from cache) every bound kernel on tiny inputs.

    Call before forking workers so children inherit ready machine code.
    """
    g = np.zeros((2, 2))
    f = np.zeros((1, 2, 2), dtype=np.complex128)
    x = np.zeros((2, 2, 1))
    naive_dft2(g)
    mix_spectrum(f, f, 0.5, 0, 0, 1, 1)
    blend_fuse(x, x, x, 0.5, 0.5)
    resize(x, 3, 3)
    logistic_fit(np.zeros((2, 1)), np.array([0.0, 1.0]), 0.1, 1, 0.0)
