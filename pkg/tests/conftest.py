"""Shared oracles and factories.

The loss oracle below is deliberately primitive: pure-Python loops and
math.exp, no shared code with the package internals. Finite differences of
this oracle are the reference every gradient test checks against.
"""

import math

import numpy as np
import pytest

from gadl.autoencoder import TiedAutoencoder, init_autoencoder
from gadl.numerics import RandomStream


def _sig(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def loss_oracle(weights, enc_bias, dec_bias, batch):
    """Mean squared reconstruction loss via scalar loops only."""
    n = len(batch)
    hidden = len(weights)
    visible = len(weights[0])
    total = 0.0
    for s in range(n):
        h = [
            _sig(sum(weights[i][j] * batch[s][j] for j in range(visible)) + enc_bias[i])
            for i in range(hidden)
        ]
        for j in range(visible):
            xhat = _sig(sum(weights[i][j] * h[i] for i in range(hidden)) + dec_bias[j])
            r = xhat - batch[s][j]
            total += r * r
    return total / (n * visible)


def fd_gradients(ae, batch, eps=1e-5):
    """Central finite differences of the loss oracle, parameter by parameter."""
    batch = [list(map(float, row)) for row in np.atleast_2d(batch)]

    def loss_at(w, be, bd):
        return loss_oracle(w, be, bd, batch)

    w = ae.weights.tolist()
    be = ae.enc_bias.tolist()
    bd = ae.dec_bias.tolist()

    d_w = np.zeros_like(ae.weights)
    for i in range(ae.hidden):
        for j in range(ae.visible):
            orig = w[i][j]
            w[i][j] = orig + eps
            up = loss_at(w, be, bd)
            w[i][j] = orig - eps
            down = loss_at(w, be, bd)
            w[i][j] = orig
            d_w[i, j] = (up - down) / (2.0 * eps)

    d_be = np.zeros_like(ae.enc_bias)
    for i in range(ae.hidden):
        orig = be[i]
        be[i] = orig + eps
        up = loss_at(w, be, bd)
        be[i] = orig - eps
        down = loss_at(w, be, bd)
        be[i] = orig
        d_be[i] = (up - down) / (2.0 * eps)

    d_bd = np.zeros_like(ae.dec_bias)
    for j in range(ae.visible):
        orig = bd[j]
        bd[j] = orig + eps
        up = loss_at(w, be, bd)
        bd[j] = orig - eps
        down = loss_at(w, be, bd)
        bd[j] = orig
        d_bd[j] = (up - down) / (2.0 * eps)

    return d_w, d_be, d_bd


def rand_ae(seed, hidden, visible, scale=0.5):
    """Autoencoder with parameters uniform in +-scale, biases included."""
    rng = RandomStream(seed).fork("ae")
    return TiedAutoencoder(
        rng.uniform(-scale, scale, (hidden, visible)),
        rng.uniform(-scale, scale, hidden),
        rng.uniform(-scale, scale, visible),
    )


@pytest.fixture
def rng():
    return RandomStream(1234)


@pytest.fixture
def small_ae():
    return init_autoencoder(4, 6, RandomStream(7).fork("init"))
