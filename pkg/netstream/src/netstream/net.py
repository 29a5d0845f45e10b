"""Double-stream pair classifier.

Each person crop runs through its own five-stage convolutional stream
(conv 3x3 + ReLU + 2x2 max pool per stage); the two conv stacks share the
layout but never the weights. The flattened stream outputs are
concatenated and passed through two shared dense layers whose last hidden
activation is the exportable pair embedding, followed by the class logits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .layers import Conv2d, Dense, MaxPool2x2, ReLU

N_STAGES = 5


@dataclass(frozen=True)
class NetSpec:
    input_size: int = 32
    in_channels: int = 1
    conv_channels: tuple = (8, 16, 16, 16, 16)
    fc6: int = 64
    fc7: int = 64
    classes: int = 2
    seed: int = 0

    def __post_init__(self):
        if len(self.conv_channels) != N_STAGES:
            raise ShapeError((N_STAGES,), (len(self.conv_channels),), "conv channel widths")
        if self.input_size % (2 ** N_STAGES) != 0 or self.input_size <= 0:
            raise ShapeError((f"multiple of {2 ** N_STAGES}",), (self.input_size,), "input size")
        if self.classes < 2:
            raise ShapeError((">= 2",), (self.classes,), "class count")

    @property
    def stream_out_dim(self) -> int:
        side = self.input_size // (2 ** N_STAGES)
        return self.conv_channels[-1] * side * side


class _Stream:
    """One independent conv stack; returns flattened features."""

    def __init__(self, spec: NetSpec, rng):
        self.stages = []
        channels = spec.in_channels
        for width in spec.conv_channels:
            self.stages.append((Conv2d(channels, width, rng), ReLU(), MaxPool2x2()))
            channels = width

    def forward(self, x):
        for conv, relu, pool in self.stages:
            x = pool.forward(relu.forward(conv.forward(x)))
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_flat, out_shape):
        grad = grad_flat.reshape(out_shape)
        for conv, relu, pool in reversed(self.stages):
            grad = conv.backward(relu.backward(pool.backward(grad)))
        return grad


class DoubleStreamNet:
    def __init__(self, spec: NetSpec):
        self.spec = spec
        rng = np.random.default_rng(spec.seed)
        self.stream_a = _Stream(spec, rng)
        self.stream_b = _Stream(spec, rng)
        self.fc6 = Dense(2 * spec.stream_out_dim, spec.fc6, rng)
        self.relu6 = ReLU()
        self.fc7 = Dense(spec.fc6, spec.fc7, rng)
        self.relu7 = ReLU()
        self.fc8 = Dense(spec.fc7, spec.classes, rng)

    def forward(self, batch_a, batch_b):
        """Returns (logits, fc7 activations)."""
        batch_a = np.asarray(batch_a, dtype=np.float64)
        batch_b = np.asarray(batch_b, dtype=np.float64)
        expected = (self.spec.in_channels, self.spec.input_size, self.spec.input_size)
        for name, batch in (("stream a", batch_a), ("stream b", batch_b)):
            if batch.ndim != 4 or batch.shape[1:] != expected:
                raise ShapeError(("n",) + expected, batch.shape, f"{name} batch")
        if batch_a.shape[0] != batch_b.shape[0]:
            raise ShapeError(batch_a.shape, batch_b.shape, "stream batch sizes")
        feat_a = self.stream_a.forward(batch_a)
        feat_b = self.stream_b.forward(batch_b)
        self._concat_split = feat_a.shape[1]
        side = self.spec.input_size // (2 ** N_STAGES)
        self._stream_shape = (batch_a.shape[0], self.spec.conv_channels[-1], side, side)
        hidden6 = self.relu6.forward(self.fc6.forward(np.concatenate([feat_a, feat_b], axis=1)))
        self._fc7_act = self.relu7.forward(self.fc7.forward(hidden6))
        return self.fc8.forward(self._fc7_act), self._fc7_act

    def backward(self, grad_logits):
        grad = self.fc8.backward(grad_logits)
        grad = self.fc7.backward(self.relu7.backward(grad))
        grad = self.fc6.backward(self.relu6.backward(grad))
        split = self._concat_split
        self.stream_a.backward(grad[:, :split], self._stream_shape)
        self.stream_b.backward(grad[:, split:], self._stream_shape)

    # -- parameter access ---------------------------------------------------

    def _groups(self):
        for side, stream in (("stream_a", self.stream_a), ("stream_b", self.stream_b)):
            for idx, (conv, _, _) in enumerate(stream.stages, start=1):
                yield f"{side}/conv{idx}", conv
        yield "fc6", self.fc6
        yield "fc7", self.fc7
        yield "fc8", self.fc8

    def parameters(self):
        return {f"{name}/{key}": array
                for name, layer in self._groups()
                for key, array in layer.parameters().items()}

    def gradients(self):
        return {f"{name}/{key}": array
                for name, layer in self._groups()
                for key, array in layer.gradients().items()}

    def conv_parameter_count(self, side: str) -> int:
        stream = self.stream_a if side == "a" else self.stream_b
        return sum(conv.W.size + conv.b.size for conv, _, _ in stream.stages)
