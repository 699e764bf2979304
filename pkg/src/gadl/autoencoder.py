"""Single-layer autoencoder with one shared weight matrix.

The layer holds one matrix ``weights`` of shape (hidden, visible) plus an
encoder and a decoder bias. Encoding multiplies by the matrix, decoding by
its transpose; there is no second matrix anywhere, so any change to one
entry shows up in both directions.

Training machinery lives elsewhere. This module knows how to run the layer
forward, score reconstruction error, compute the exact gradient of the
mean squared reconstruction loss (both tied paths summed into one
``d_weights``), and apply a plain gradient-descent step.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .numerics import as_matrix, as_vector, matvec, matvec_transposed, sigmoid

__all__ = [
    "Gradients",
    "TiedAutoencoder",
    "decode",
    "encode",
    "gradient",
    "init_autoencoder",
    "reconstruct",
    "rmse",
    "sgd_step",
    "sparsity",
]


@dataclass
class TiedAutoencoder:
    """One encoder/decoder pair sharing a (hidden, visible) weight matrix."""

    weights: np.ndarray
    enc_bias: np.ndarray
    dec_bias: np.ndarray

    def __post_init__(self):
        self.weights = as_matrix(self.weights, "weights")
        self.enc_bias = as_vector(self.enc_bias, "enc_bias")
        self.dec_bias = as_vector(self.dec_bias, "dec_bias")
        if self.enc_bias.shape[0] != self.weights.shape[0]:
            raise ValueError(
                f"enc_bias has length {self.enc_bias.shape[0]}, "
                f"expected hidden size {self.weights.shape[0]}"
            )
        if self.dec_bias.shape[0] != self.weights.shape[1]:
            raise ValueError(
                f"dec_bias has length {self.dec_bias.shape[0]}, "
                f"expected visible size {self.weights.shape[1]}"
            )

    @property
    def hidden(self):
        return self.weights.shape[0]

    @property
    def visible(self):
        return self.weights.shape[1]

    def copy(self):
        return TiedAutoencoder(
            self.weights.copy(), self.enc_bias.copy(), self.dec_bias.copy()
        )


@dataclass
class Gradients:
    """Loss gradients, shaped exactly like the owning autoencoder."""

    d_weights: np.ndarray
    d_enc_bias: np.ndarray
    d_dec_bias: np.ndarray


def init_autoencoder(hidden, visible, rng):
    """Fresh layer: weights uniform in +-1/sqrt(visible), biases zero.

    The scale keeps sigmoid pre-activations in the responsive range for
    inputs in [0, 1].
    """
    if hidden < 1 or visible < 1:
        raise ValueError("hidden and visible sizes must be >= 1")
    bound = 1.0 / np.sqrt(visible)
    w = rng.uniform(-bound, bound, (hidden, visible))
    return TiedAutoencoder(w, np.zeros(hidden), np.zeros(visible))


def as_batch(samples, visible):
    """Coerce a sample collection to a (n, visible) float64 array."""
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("samples must be a non-empty collection of vectors")
    if x.shape[1] != visible:
        raise ValueError(
            f"sample dimension {x.shape[1]} does not match visible size {visible}"
        )
    return x


def encode(ae, x):
    """Hidden activations ``sigmoid(W x + enc_bias)`` for one input vector."""
    x = as_vector(x, "x")
    if x.shape[0] != ae.visible:
        raise ValueError(
            f"input has length {x.shape[0]}, expected visible size {ae.visible}"
        )
    return sigmoid(matvec(ae.weights, x) + ae.enc_bias)


def decode(ae, h):
    """Reconstruction ``sigmoid(W^T h + dec_bias)`` for one hidden vector."""
    h = as_vector(h, "h")
    if h.shape[0] != ae.hidden:
        raise ValueError(
            f"hidden vector has length {h.shape[0]}, expected {ae.hidden}"
        )
    return sigmoid(matvec_transposed(ae.weights, h) + ae.dec_bias)


def reconstruct(ae, x):
    """Encode then decode one input vector."""
    return decode(ae, encode(ae, x))


def rmse(ae, samples):
    """Root mean squared reconstruction error over a sample set.

    The mean runs over samples and components both:
    ``sqrt(sum((x - xhat)^2) / (n * visible))``, so values are comparable
    across layers of different widths.
    """
    x = as_batch(samples, ae.visible)
    sse = kernels.sum_squared_error(ae.weights, ae.enc_bias, ae.dec_bias, x)
    return float(np.sqrt(sse / x.size))


def gradient(ae, batch):
    """Gradient of the mean squared reconstruction loss over a batch.

    The loss is ``sum((x - xhat)^2) / (n * visible)``, i.e. ``rmse**2``,
    so descending this gradient optimizes the same quantity rmse reports.
    Encoder-path and decoder-path contributions are summed into the single
    tied ``d_weights``.
    """
    x = as_batch(batch, ae.visible)
    d_w, d_enc, d_dec = kernels.gradient_batch(
        ae.weights, ae.enc_bias, ae.dec_bias, x
    )
    return Gradients(d_w, d_enc, d_dec)


def sgd_step(ae, g, learning_rate):
    """One descent step; returns a new autoencoder, the input is untouched."""
    if learning_rate <= 0.0:
        raise ValueError("learning_rate must be > 0")
    if g.d_weights.shape != ae.weights.shape:
        raise ValueError("gradient shape does not match autoencoder shape")
    return TiedAutoencoder(
        ae.weights - learning_rate * g.d_weights,
        ae.enc_bias - learning_rate * g.d_enc_bias,
        ae.dec_bias - learning_rate * g.d_dec_bias,
    )


def sparsity(ae, threshold=0.0):
    """Fraction of weight entries with ``|w| <= threshold``; biases excluded."""
    if threshold < 0.0:
        raise ValueError("threshold must be >= 0")
    return float(np.mean(np.abs(ae.weights) <= threshold))
