"""Greedy layer-wise assembly of trained layers into a frozen feature extractor.

Once a layer is trained, its decoder side is dropped and the encoder
(weights plus encoder bias) is frozen into the stack; the training data is
then pushed through it to become the next layer's input. Frozen layers are
stored with write-protected arrays and never change again.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .autoencoder import as_batch
from .numerics import as_vector, matvec, sigmoid

__all__ = [
    "DeepStack",
    "FrozenLayer",
    "extract_features",
    "push_trained_layer",
    "train_stack",
]


@dataclass(frozen=True)
class FrozenLayer:
    """Immutable encoder half of a trained layer."""

    weights: np.ndarray
    enc_bias: np.ndarray

    @property
    def hidden(self):
        return self.weights.shape[0]

    @property
    def visible(self):
        return self.weights.shape[1]


@dataclass(frozen=True)
class DeepStack:
    """Ordered frozen encoder layers; adjacent shapes chain."""

    layers: tuple = ()

    @property
    def depth(self):
        return len(self.layers)

    @property
    def input_width(self):
        return self.layers[0].visible if self.layers else None

    @property
    def output_width(self):
        return self.layers[-1].hidden if self.layers else None

    def widths(self):
        if not self.layers:
            return ()
        return (self.layers[0].visible,) + tuple(l.hidden for l in self.layers)


def _freeze(arr):
    out = np.ascontiguousarray(arr, dtype=np.float64).copy()
    out.flags.writeable = False
    return out


def push_trained_layer(stack, ae):
    """Append a trained layer's encoder; the decoder bias is discarded.

    The new layer's visible size must match the current stack output
    width. Returns a new stack; the input stack is untouched.
    """
    if stack.layers and ae.visible != stack.output_width:
        raise ValueError(
            f"layer visible size {ae.visible} does not chain onto "
            f"stack output width {stack.output_width}"
        )
    layer = FrozenLayer(_freeze(ae.weights), _freeze(ae.enc_bias))
    return DeepStack(stack.layers + (layer,))


def extract_features(stack, x):
    """Run input through every frozen layer in order.

    Accepts a single vector or a (n, input_width) batch; an empty stack
    returns the input unchanged (as float64).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        out = as_vector(x, "x")
        if stack.layers and out.shape[0] != stack.input_width:
            raise ValueError(
                f"input has length {out.shape[0]}, expected {stack.input_width}"
            )
        for layer in stack.layers:
            out = sigmoid(matvec(layer.weights, out) + layer.enc_bias)
        return out
    if x.ndim != 2:
        raise ValueError("input must be a vector or a 2-D batch")
    out = as_batch(x, stack.input_width if stack.layers else x.shape[1])
    for layer in stack.layers:
        out = kernels.encode_batch(layer.weights, layer.enc_bias, out)
    return out


def train_stack(architecture, data, train_layer_fn, rng):
    """Train one layer per consecutive width pair, freezing as it goes.

    ``train_layer_fn(hidden, visible, features, layer_rng)`` must return
    ``(TiedAutoencoder, history)``. Each layer trains on the previous
    layer's materialized outputs; the first width must match the data
    dimension. Returns the frozen stack and the per-layer histories.
    """
    architecture = tuple(int(w) for w in architecture)
    if len(architecture) < 2:
        raise ValueError("architecture needs at least an input and one hidden width")
    if any(w < 1 for w in architecture):
        raise ValueError("architecture widths must be >= 1")
    features = as_batch(data, architecture[0])
    stack = DeepStack()
    histories = []
    for k, (visible, hidden) in enumerate(zip(architecture, architecture[1:])):
        ae, history = train_layer_fn(hidden, visible, features, rng.fork("layer", k))
        if ae.visible != visible or ae.hidden != hidden:
            raise ValueError(
                f"trained layer is {ae.hidden}x{ae.visible}, "
                f"expected {hidden}x{visible}"
            )
        stack = push_trained_layer(stack, ae)
        histories.append(history)
        features = kernels.encode_batch(ae.weights, ae.enc_bias, features)
    return stack, histories
