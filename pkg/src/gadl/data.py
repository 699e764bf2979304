"""IDX file ingestion, pixel scaling, dataset slicing, and synthetic data.

IDX is the classic big-endian image/label container: a 4-byte magic
(2051 for images, 2049 for labels), big-endian counts and dimensions, then
a flat unsigned-byte payload. Parsing is strict: a single missing or
trailing byte rejects the file. Gzip-compressed files are accepted
transparently (sniffed by the gzip magic bytes).

Files are supplied by the caller; nothing here downloads anything.
"""

import gzip
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "LabeledDataset",
    "IMAGE_MAGIC",
    "LABEL_MAGIC",
    "images_to_idx_bytes",
    "labels_to_idx_bytes",
    "load_idx_images",
    "load_idx_labels",
    "subset",
    "synthetic_blobs",
    "to_dataset",
]

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


@dataclass
class Dataset:
    """Samples as a (n, dim) float64 array with every component in [0, 1]."""

    x: np.ndarray

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            raise ValueError(f"samples must be 2-D, got shape {self.x.shape}")
        if self.x.size and (self.x.min() < 0.0 or self.x.max() > 1.0):
            raise ValueError("sample components must lie in [0, 1]")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def dim(self):
        return self.x.shape[1]


@dataclass
class LabeledDataset:
    """Dataset plus one integer label in [0, 9] per sample."""

    x: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        base = Dataset(self.x)
        self.x = base.x
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1 or self.labels.shape[0] != self.x.shape[0]:
            raise ValueError("need exactly one label per sample")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() > 9):
            raise ValueError("labels must lie in [0, 9]")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def dim(self):
        return self.x.shape[1]


def _read_file(path):
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:2] == b"\x1f\x8b":
        blob = gzip.decompress(blob)
    return blob


def load_idx_images(path):
    """Parse an IDX image file into a (count, rows, cols) uint8 array."""
    blob = _read_file(path)
    if len(blob) < 4:
        raise ValueError("corrupt file: too short for an IDX header")
    magic = struct.unpack(">I", blob[:4])[0]
    if magic != IMAGE_MAGIC:
        raise ValueError(f"not an IDX image file (magic {magic}, expected {IMAGE_MAGIC})")
    if len(blob) < 16:
        raise ValueError("corrupt file: IDX image header needs 16 bytes")
    count, rows, cols = struct.unpack(">III", blob[4:16])
    expected = 16 + count * rows * cols
    if len(blob) != expected:
        raise ValueError(
            f"corrupt file: payload is {len(blob) - 16} bytes, "
            f"expected {count * rows * cols}"
        )
    return np.frombuffer(blob, dtype=np.uint8, offset=16).reshape(count, rows, cols)


def load_idx_labels(path):
    """Parse an IDX label file into a (count,) uint8 array of digits."""
    blob = _read_file(path)
    if len(blob) < 4:
        raise ValueError("corrupt file: too short for an IDX header")
    magic = struct.unpack(">I", blob[:4])[0]
    if magic != LABEL_MAGIC:
        raise ValueError(f"not an IDX label file (magic {magic}, expected {LABEL_MAGIC})")
    if len(blob) < 8:
        raise ValueError("corrupt file: IDX label header needs 8 bytes")
    count = struct.unpack(">I", blob[4:8])[0]
    if len(blob) != 8 + count:
        raise ValueError(
            f"corrupt file: payload is {len(blob) - 8} bytes, expected {count}"
        )
    labels = np.frombuffer(blob, dtype=np.uint8, offset=8)
    if labels.size and labels.max() > 9:
        raise ValueError("corrupt file: label outside [0, 9]")
    return labels


def images_to_idx_bytes(images):
    """Serialize a (count, rows, cols) uint8 array back to IDX bytes."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError("images must be (count, rows, cols)")
    header = struct.pack(">IIII", IMAGE_MAGIC, *images.shape)
    return header + images.tobytes()


def labels_to_idx_bytes(labels):
    """Serialize a label vector back to IDX bytes."""
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError("labels must be 1-D")
    return struct.pack(">II", LABEL_MAGIC, labels.shape[0]) + labels.tobytes()


def to_dataset(raw_images):
    """Scale bytes to [0, 1] and flatten each image row-major."""
    raw = np.asarray(raw_images)
    if raw.ndim != 3:
        raise ValueError("raw images must be (count, rows, cols)")
    flat = raw.reshape(raw.shape[0], -1).astype(np.float64) / 255.0
    return Dataset(flat)


def subset(ds, indices):
    """Select samples by position, in the given order.

    Indices must be unique and in range. Works for plain and labeled
    datasets; an empty selection is allowed here and rejected by whatever
    downstream operation needs data.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("indices must be 1-D")
    if idx.size:
        if idx.min() < 0 or idx.max() >= ds.n:
            raise ValueError("index out of range")
        if np.unique(idx).size != idx.size:
            raise ValueError("indices must not repeat")
    if isinstance(ds, LabeledDataset):
        return LabeledDataset(ds.x[idx], ds.labels[idx])
    return Dataset(ds.x[idx])


def synthetic_blobs(dim, n_clusters, n_samples, spread, rng):
    """Deterministic clustered test data in [0, 1]^dim.

    Cluster centers are uniform in [0.2, 0.8]^dim; each sample is its
    cluster center plus uniform noise of half-width ``spread``, clipped to
    [0, 1]. Labels cycle through the clusters, so classes stay balanced.
    """
    if dim < 1 or not 1 <= n_clusters <= 10 or n_samples < 0:
        raise ValueError("need dim >= 1, 1 <= n_clusters <= 10, n_samples >= 0")
    if spread < 0.0:
        raise ValueError("spread must be >= 0")
    centers = rng.uniform(0.2, 0.8, (n_clusters, dim))
    labels = np.arange(n_samples, dtype=np.int64) % n_clusters
    noise = rng.uniform(-spread, spread, (n_samples, dim))
    x = np.clip(centers[labels] + noise, 0.0, 1.0)
    return LabeledDataset(x, labels)
