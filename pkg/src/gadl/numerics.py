"""Minimal dense linear algebra, the logistic nonlinearity, and seeded RNG streams.

Everything downstream builds on the three primitives here: matrix-vector
products (plain and transposed, the transposed one never materializes the
transpose), an overflow-safe logistic sigmoid, and :class:`RandomStream`,
a reproducible PCG64 stream that can be forked by label into independent
substreams.
"""

import hashlib

import numpy as np

__all__ = [
    "RandomStream",
    "as_matrix",
    "as_vector",
    "matvec",
    "matvec_transposed",
    "sigmoid",
]


def as_vector(v, name="vector"):
    """Coerce to a 1-D float64 array, rejecting anything else."""
    out = np.asarray(v, dtype=np.float64)
    if out.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {out.shape}")
    if out.size < 1:
        raise ValueError(f"{name} must have at least one element")
    return out


def as_matrix(m, name="matrix"):
    """Coerce to a 2-D C-contiguous float64 array, rejecting anything else."""
    out = np.ascontiguousarray(m, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    return out


def matvec(m, v):
    """Compute ``m @ v``.

    Parameters
    ----------
    m : ndarray, shape (rows, cols)
    v : ndarray, shape (cols,)

    Returns
    -------
    ndarray, shape (rows,)
    """
    m = as_matrix(m, "m")
    v = as_vector(v, "v")
    if m.shape[1] != v.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix is {m.shape[0]}x{m.shape[1]}, "
            f"vector has length {v.shape[0]}"
        )
    return m @ v


def matvec_transposed(m, v):
    """Compute ``m.T @ v`` without materializing the transpose.

    Parameters
    ----------
    m : ndarray, shape (rows, cols)
    v : ndarray, shape (rows,)

    Returns
    -------
    ndarray, shape (cols,)
    """
    m = as_matrix(m, "m")
    v = as_vector(v, "v")
    if m.shape[0] != v.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix is {m.shape[0]}x{m.shape[1]}, "
            f"vector has length {v.shape[0]}"
        )
    return m.T @ v


def sigmoid(x):
    """Logistic sigmoid ``1 / (1 + exp(-x))``, safe for any finite input.

    Large negative inputs saturate to 0 and large positive inputs to 1
    without ever overflowing: the exponential is only evaluated at
    non-positive arguments.

    Accepts scalars or arrays; returns a float for scalar input.
    """
    arr = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(arr))
    out = np.where(arr >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    if arr.ndim == 0:
        return float(out)
    return out


class RandomStream:
    """Deterministic random stream with hierarchical, label-addressed forking.

    The underlying generator is numpy's PCG64. The bit generator is keyed
    by the SHA-256 digest of the seed together with the full fork path, so

    * the same seed always reproduces the same draw sequence, on any
      platform,
    * ``fork(label)`` yields a substream that depends only on
      ``(seed, path + (label,))``, never on how much of the parent stream
      has been consumed, and
    * substreams with different labels are statistically independent.

    A stream is meant to have a single owner; fork rather than share.
    """

    def __init__(self, seed, path=()):
        self.seed = int(seed)
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.path = tuple(path)
        self._gen = np.random.Generator(np.random.PCG64(self._key()))

    def _key(self):
        h = hashlib.sha256()
        h.update(str(self.seed).encode("ascii"))
        for label in self.path:
            if isinstance(label, str):
                h.update(b"/s:" + label.encode("utf-8"))
            elif isinstance(label, (int, np.integer)):
                h.update(b"/i:" + str(int(label)).encode("ascii"))
            else:
                raise TypeError(f"fork labels must be str or int, got {type(label)!r}")
        return int.from_bytes(h.digest()[:16], "little")

    def fork(self, *labels):
        """Return an independent child stream addressed by ``labels``."""
        if not labels:
            raise ValueError("fork requires at least one label")
        return RandomStream(self.seed, self.path + labels)

    def next_uniform(self):
        """Draw one float uniformly from [0, 1), advancing the stream."""
        return float(self._gen.random())

    def uniform(self, low=0.0, high=1.0, size=None):
        """Draw uniforms from [low, high)."""
        return self._gen.uniform(low, high, size)

    def integers(self, n):
        """Draw one integer uniformly from {0, ..., n-1}."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return int(self._gen.integers(0, n))

    def permutation(self, n):
        """Return a uniformly random permutation of range(n)."""
        return self._gen.permutation(n)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, path={self.path!r})"
