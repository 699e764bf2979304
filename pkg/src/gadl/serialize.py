"""Binary model files (.gadl).

Layout, all integers little-endian unsigned 32-bit, all floats IEEE-754
binary64 little-endian:

    magic   4 bytes  b"GADL"
    version u32      currently 1
    count   u32      number of layers
    then per layer:
        hidden  u32
        visible u32
        dec_len u32   visible for a full autoencoder, 0 for a frozen layer
        weights hidden*visible f64, row-major
        enc_bias hidden f64
        dec_bias dec_len f64

A full autoencoder is a one-layer file carrying its decoder bias; frozen
stack layers store a zero-length decoder bias. Readers demand an exact
byte count, so truncated or padded files are rejected.
"""

import struct

import numpy as np

from .autoencoder import TiedAutoencoder
from .stack import DeepStack, FrozenLayer, push_trained_layer

__all__ = [
    "MAGIC",
    "VERSION",
    "autoencoder_to_bytes",
    "bytes_to_autoencoder",
    "bytes_to_stack",
    "load_autoencoder",
    "load_stack",
    "save_autoencoder",
    "save_stack",
    "stack_to_bytes",
]

MAGIC = b"GADL"
VERSION = 1


def _f64_bytes(arr):
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _layer_bytes(weights, enc_bias, dec_bias):
    hidden, visible = weights.shape
    dec_len = 0 if dec_bias is None else dec_bias.shape[0]
    parts = [struct.pack("<III", hidden, visible, dec_len),
             _f64_bytes(weights), _f64_bytes(enc_bias)]
    if dec_len:
        parts.append(_f64_bytes(dec_bias))
    return b"".join(parts)


def autoencoder_to_bytes(ae):
    head = MAGIC + struct.pack("<II", VERSION, 1)
    return head + _layer_bytes(ae.weights, ae.enc_bias, ae.dec_bias)


def stack_to_bytes(stack):
    head = MAGIC + struct.pack("<II", VERSION, len(stack.layers))
    return head + b"".join(
        _layer_bytes(l.weights, l.enc_bias, None) for l in stack.layers
    )


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.blob):
            raise ValueError(f"corrupt model file: truncated while reading {what}")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self, what):
        return struct.unpack("<I", self.take(4, what))[0]

    def f64s(self, count, what):
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)

    def done(self):
        if self.pos != len(self.blob):
            raise ValueError(
                f"corrupt model file: {len(self.blob) - self.pos} trailing bytes"
            )


def _read_layers(blob):
    r = _Reader(blob)
    if r.take(4, "magic") != MAGIC:
        raise ValueError("not a GADL model file (bad magic)")
    version = r.u32("version")
    if version != VERSION:
        raise ValueError(f"unsupported model format version {version}")
    count = r.u32("layer count")
    layers = []
    for k in range(count):
        hidden = r.u32(f"layer {k} hidden")
        visible = r.u32(f"layer {k} visible")
        dec_len = r.u32(f"layer {k} dec_len")
        if hidden < 1 or visible < 1:
            raise ValueError(f"corrupt model file: layer {k} has empty shape")
        if dec_len not in (0, visible):
            raise ValueError(
                f"corrupt model file: layer {k} dec_len {dec_len} "
                f"is neither 0 nor {visible}"
            )
        w = r.f64s(hidden * visible, f"layer {k} weights").reshape(hidden, visible)
        enc = r.f64s(hidden, f"layer {k} enc_bias")
        dec = r.f64s(dec_len, f"layer {k} dec_bias") if dec_len else None
        layers.append((w, enc, dec))
    r.done()
    return layers


def bytes_to_autoencoder(blob):
    layers = _read_layers(blob)
    if len(layers) != 1:
        raise ValueError(f"expected a single-layer file, found {len(layers)} layers")
    w, enc, dec = layers[0]
    if dec is None:
        raise ValueError("file holds a frozen layer, not a full autoencoder")
    return TiedAutoencoder(w, enc, dec)


def bytes_to_stack(blob):
    stack = DeepStack()
    for w, enc, dec in _read_layers(blob):
        if stack.layers and w.shape[1] != stack.output_width:
            raise ValueError("corrupt model file: layer shapes do not chain")
        stack = push_trained_layer(
            stack, TiedAutoencoder(w, enc, np.zeros(w.shape[1]))
        )
    return stack


def save_autoencoder(ae, path):
    with open(path, "wb") as f:
        f.write(autoencoder_to_bytes(ae))


def load_autoencoder(path):
    with open(path, "rb") as f:
        return bytes_to_autoencoder(f.read())


def save_stack(stack, path):
    with open(path, "wb") as f:
        f.write(stack_to_bytes(stack))


def load_stack(path):
    with open(path, "rb") as f:
        return bytes_to_stack(f.read())
