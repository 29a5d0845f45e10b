"""Toy-scale training loop: seeded minibatch SGD with momentum."""

from __future__ import annotations

import numpy as np

from .errors import TrainError
from .layers import cross_entropy, softmax
from .net import DoubleStreamNet, NetSpec


def train_toy(spec: NetSpec, dataset, epochs: int = 20, lr: float = 1e-4,
              momentum: float = 0.9, batch_size: int = 10):
    """Train a fresh network on (batch_a, batch_b, labels); returns
    (net, per-epoch mean loss curve). Deterministic given the spec seed."""
    batch_a, batch_b, labels = dataset
    labels = np.asarray(labels)
    if len(set(labels.tolist())) < 2:
        raise TrainError("need at least two classes")
    n = len(labels)
    net = DoubleStreamNet(spec)
    velocity = {name: np.zeros_like(p) for name, p in net.parameters().items()}
    rng = np.random.default_rng(spec.seed)
    losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            take = order[start:start + batch_size]
            logits, _ = net.forward(batch_a[take], batch_b[take])
            loss, grad_logits = cross_entropy(logits, labels[take])
            if not np.isfinite(loss):
                raise TrainError(f"loss diverged to {loss!r}")
            epoch_loss += loss * len(take)
            net.backward(grad_logits)
            if lr != 0.0:
                grads = net.gradients()
                params = net.parameters()
                for name in params:
                    velocity[name] = momentum * velocity[name] - lr * grads[name]
                    params[name] += velocity[name]
        losses.append(epoch_loss / n)
    return net, losses


def accuracy(net: DoubleStreamNet, dataset) -> float:
    batch_a, batch_b, labels = dataset
    logits, _ = net.forward(batch_a, batch_b)
    return float((softmax(logits).argmax(axis=1) == np.asarray(labels)).mean())
