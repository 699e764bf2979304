"""Hot batch kernels for the tied autoencoder, in two interchangeable flavors.

The forward pass, the squared-error sum, and the fused forward/backward
gradient over a mini-batch dominate the runtime of every training run, so
they exist twice: a numba ``@njit`` implementation (matrix products still
go through BLAS, elementwise work and reductions are fused loops) and a
pure-numpy implementation.

Selection happens once at import time via the ``GADL_BACKEND`` environment
variable: ``numba`` (default when numba imports cleanly) or ``numpy``.
Both flavors compute the same quantities; they may differ in the last few
ulps because summation orders differ. Each flavor is individually
deterministic: same inputs, same bits out.

All kernels expect C-contiguous float64 arrays. Batches are row-major:
``x`` has one sample per row. The weight matrix ``w`` is (hidden, visible),
encoding is ``sigmoid(x @ w.T + b_enc)`` and decoding reuses the same
matrix transposed, ``sigmoid(h @ w + b_dec)``.

``benchmarks/bench_kernels.py`` times the two flavors against each other.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "encode_batch",
    "forward_batch",
    "gradient_batch",
    "sum_squared_error",
    "warmup",
]

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

_requested = os.environ.get("GADL_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"GADL_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )
if _requested == "numba" and not HAVE_NUMBA:
    raise RuntimeError("GADL_BACKEND=numba but numba is not importable")

BACKEND = _requested or ("numba" if HAVE_NUMBA else "numpy")


# ---------------------------------------------------------------------------
# pure-numpy flavor

def _sigmoid(z):
    # exp only sees non-positive arguments, so this never overflows
    e = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def encode_batch_numpy(w, b_enc, x):
    return _sigmoid(x @ w.T + b_enc)


def forward_batch_numpy(w, b_enc, b_dec, x):
    h = _sigmoid(x @ w.T + b_enc)
    xhat = _sigmoid(h @ w + b_dec)
    return h, xhat


def sum_squared_error_numpy(w, b_enc, b_dec, x):
    _, xhat = forward_batch_numpy(w, b_enc, b_dec, x)
    r = (xhat - x).ravel()
    return float(r @ r)


def gradient_batch_numpy(w, b_enc, b_dec, x):
    n, v = x.shape
    h, xhat = forward_batch_numpy(w, b_enc, b_dec, x)
    # loss = sum((xhat - x)^2) / (n * v); both decoder and encoder paths
    # contribute to d_w because the weights are tied
    d_out = (xhat - x) * (xhat * (1.0 - xhat)) * (2.0 / (n * v))
    d_dec = d_out.sum(axis=0)
    d_hid = (d_out @ w.T) * (h * (1.0 - h))
    d_enc = d_hid.sum(axis=0)
    d_w = d_hid.T @ x + h.T @ d_out
    return d_w, d_enc, d_dec


# ---------------------------------------------------------------------------
# numba flavor

if HAVE_NUMBA:

    @njit(cache=True)
    def _sigmoid_bias_inplace(z, b):
        n, m = z.shape
        for i in range(n):
            for j in range(m):
                val = z[i, j] + b[j]
                if val >= 0.0:
                    e = np.exp(-val)
                    z[i, j] = 1.0 / (1.0 + e)
                else:
                    e = np.exp(val)
                    z[i, j] = e / (1.0 + e)

    @njit(cache=True)
    def encode_batch_numba(w, b_enc, x):
        h = x @ np.ascontiguousarray(w.T)
        _sigmoid_bias_inplace(h, b_enc)
        return h

    @njit(cache=True)
    def forward_batch_numba(w, b_enc, b_dec, x):
        h = x @ np.ascontiguousarray(w.T)
        _sigmoid_bias_inplace(h, b_enc)
        xhat = h @ w
        _sigmoid_bias_inplace(xhat, b_dec)
        return h, xhat

    @njit(cache=True)
    def sum_squared_error_numba(w, b_enc, b_dec, x):
        h, xhat = forward_batch_numba(w, b_enc, b_dec, x)
        n, v = x.shape
        acc = 0.0
        for i in range(n):
            for j in range(v):
                r = xhat[i, j] - x[i, j]
                acc += r * r
        return acc

    @njit(cache=True)
    def gradient_batch_numba(w, b_enc, b_dec, x):
        n, v = x.shape
        hd = w.shape[0]
        wt = np.ascontiguousarray(w.T)
        h = x @ wt
        _sigmoid_bias_inplace(h, b_enc)
        d_out = h @ w
        _sigmoid_bias_inplace(d_out, b_dec)
        scale = 2.0 / (n * v)
        d_dec = np.zeros(v)
        for i in range(n):
            for j in range(v):
                s = d_out[i, j]
                d = (s - x[i, j]) * s * (1.0 - s) * scale
                d_out[i, j] = d
                d_dec[j] += d
        d_hid = d_out @ wt
        d_enc = np.zeros(hd)
        for i in range(n):
            for j in range(hd):
                hh = h[i, j]
                d_hid[i, j] *= hh * (1.0 - hh)
                d_enc[j] += d_hid[i, j]
        d_w = np.ascontiguousarray(d_hid.T) @ x
        d_w += np.ascontiguousarray(h.T) @ d_out
        return d_w, d_enc, d_dec


# ---------------------------------------------------------------------------
# dispatch

if BACKEND == "numba":
    encode_batch = encode_batch_numba
    forward_batch = forward_batch_numba
    sum_squared_error = sum_squared_error_numba
    gradient_batch = gradient_batch_numba
else:
    encode_batch = encode_batch_numpy
    forward_batch = forward_batch_numpy
    sum_squared_error = sum_squared_error_numpy
    gradient_batch = gradient_batch_numpy


def warmup():
    """Trigger jit compilation on tiny inputs so timings stay honest."""
    w = np.ones((2, 3))
    b_enc = np.zeros(2)
    b_dec = np.zeros(3)
    x = np.full((1, 3), 0.5)
    encode_batch(w, b_enc, x)
    forward_batch(w, b_enc, b_dec, x)
    sum_squared_error(w, b_enc, b_dec, x)
    gradient_batch(w, b_enc, b_dec, x)
