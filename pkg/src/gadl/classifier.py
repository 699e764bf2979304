"""Multinomial logistic regression over extracted features.

This is the shared downstream scorer used to compare feature sets: one
linear layer plus softmax, fit by mini-batch gradient descent on
cross-entropy. Both training arms are judged by the identical classifier
configuration, so differences in error rate reflect the features alone.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SoftmaxClassifier",
    "error_rate",
    "predict",
    "predict_batch",
    "softmax",
    "train_classifier",
    "xent_loss_and_grad",
]


@dataclass
class SoftmaxClassifier:
    weights: np.ndarray  # (classes, feature dim)
    biases: np.ndarray   # (classes,)

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.biases = np.ascontiguousarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.ndim != 1:
            raise ValueError("weights must be 2-D and biases 1-D")
        if self.weights.shape[0] != self.biases.shape[0]:
            raise ValueError("one bias per class required")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.biases).all()):
            raise ValueError("parameters must be finite")

    @property
    def n_classes(self):
        return self.weights.shape[0]


def softmax(scores):
    """Row-wise softmax, stabilized by subtracting the row max."""
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def xent_loss_and_grad(clf, x, y):
    """Mean cross-entropy and its gradient for a batch.

    ``x`` is (n, dim), ``y`` integer labels. Returns
    ``(loss, d_weights, d_biases)``.
    """
    n = x.shape[0]
    p = softmax(x @ clf.weights.T + clf.biases)
    loss = float(-np.log(p[np.arange(n), y] + 1e-300).mean())
    p[np.arange(n), y] -= 1.0
    p /= n
    return loss, p.T @ x, p.sum(axis=0)


def _check_features_labels(features, labels, n_classes=None):
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("features must be a non-empty (n, dim) array")
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ValueError("need exactly one label per feature row")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes})")
    return x, y, n_classes


def train_classifier(features, labels, epochs, learning_rate, rng,
                     n_classes=None, batch_size=50):
    """Fit from zero-initialized parameters; deterministic given the stream.

    Each epoch visits every sample once in a freshly drawn order. With
    ``epochs=0`` the returned model still has all-zero parameters and
    predicts class 0 everywhere (uniform scores, lowest index wins).
    """
    x, y, n_classes = _check_features_labels(features, labels, n_classes)
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if learning_rate <= 0.0:
        raise ValueError("learning_rate must be > 0")
    clf = SoftmaxClassifier(np.zeros((n_classes, x.shape[1])), np.zeros(n_classes))
    n = x.shape[0]
    for epoch in range(epochs):
        order = rng.fork("epoch", epoch).permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            _, d_w, d_b = xent_loss_and_grad(clf, x[idx], y[idx])
            clf = SoftmaxClassifier(
                clf.weights - learning_rate * d_w,
                clf.biases - learning_rate * d_b,
            )
    return clf


def predict_batch(clf, features):
    """Predicted class per row; argmax ties resolve to the lowest index."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != clf.weights.shape[1]:
        raise ValueError(
            f"features must be (n, {clf.weights.shape[1]}), got {x.shape}"
        )
    return np.argmax(x @ clf.weights.T + clf.biases, axis=1)


def predict(clf, feature):
    """Predicted class for one feature vector."""
    f = np.asarray(feature, dtype=np.float64)
    if f.ndim != 1:
        raise ValueError("feature must be a vector")
    return int(predict_batch(clf, f.reshape(1, -1))[0])


def error_rate(clf, features, labels):
    """Fraction of rows whose prediction differs from the label."""
    x, y, _ = _check_features_labels(features, labels, clf.n_classes)
    return float(np.mean(predict_batch(clf, x) != y))
