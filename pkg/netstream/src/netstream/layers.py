"""Minimal float64 layers with explicit forward/backward passes.

Everything is written for clarity and gradient-checkability rather than
speed: im2col convolutions, 2x2 max pooling with argmax routing, dense
layers, ReLU. Shapes follow the (batch, channels, height, width)
convention.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def _im2col(x, kh, kw, pad):
    n, c, h, w = x.shape
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    out_h = h + 2 * pad - kh + 1
    out_w = w + 2 * pad - kw + 1
    cols = np.empty((n, c, kh, kw, out_h, out_w))
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = padded[:, :, i:i + out_h, j:j + out_w]
    return cols.reshape(n, c * kh * kw, out_h * out_w), out_h, out_w


class Conv2d:
    """3x3 same-padding convolution, stride 1."""

    def __init__(self, in_channels, out_channels, rng, kernel=3):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.pad = kernel // 2
        fan_in = in_channels * kernel * kernel
        self.W = rng.normal(scale=np.sqrt(2.0 / fan_in), size=(out_channels, in_channels, kernel, kernel))
        self.b = np.zeros(out_channels)
        self._cache = None

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ShapeError(("n", self.in_channels, "h", "w"), x.shape, "conv input")
        cols, out_h, out_w = _im2col(x, self.kernel, self.kernel, self.pad)
        flat_w = self.W.reshape(self.out_channels, -1)
        out = np.einsum("of,nfp->nop", flat_w, cols) + self.b[None, :, None]
        self._cache = (x.shape, cols)
        return out.reshape(x.shape[0], self.out_channels, out_h, out_w)

    def backward(self, grad_out):
        x_shape, cols = self._cache
        n, _, h, w = x_shape
        grad_flat = grad_out.reshape(n, self.out_channels, -1)
        self.dW = np.einsum("nop,nfp->of", grad_flat, cols).reshape(self.W.shape)
        self.db = grad_flat.sum(axis=(0, 2))
        flat_w = self.W.reshape(self.out_channels, -1)
        grad_cols = np.einsum("of,nop->nfp", flat_w, grad_flat)
        # col2im: scatter-add the column gradients back onto the padded image
        k, pad = self.kernel, self.pad
        out_h = h + 2 * pad - k + 1
        out_w = w + 2 * pad - k + 1
        grad_cols = grad_cols.reshape(n, self.in_channels, k, k, out_h, out_w)
        padded = np.zeros((n, self.in_channels, h + 2 * pad, w + 2 * pad))
        for i in range(k):
            for j in range(k):
                padded[:, :, i:i + out_h, j:j + out_w] += grad_cols[:, :, i, j]
        return padded[:, :, pad:pad + h, pad:pad + w]

    def parameters(self):
        return {"W": self.W, "b": self.b}

    def gradients(self):
        return {"W": self.dW, "b": self.db}


class ReLU:
    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad_out):
        return grad_out * self._mask


class MaxPool2x2:
    """2x2 max pooling, stride 2; gradients route to the argmax cell."""

    def forward(self, x):
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ShapeError((n, c, "even", "even"), x.shape, "pool input")
        windows = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        windows = windows.reshape(n, c, h // 2, w // 2, 4)
        self._argmax = windows.argmax(axis=-1)
        self._in_shape = x.shape
        return windows.max(axis=-1)

    def backward(self, grad_out):
        n, c, h, w = self._in_shape
        grad_windows = np.zeros((n, c, h // 2, w // 2, 4))
        np.put_along_axis(grad_windows, self._argmax[..., None], grad_out[..., None], axis=-1)
        grad = grad_windows.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return grad.reshape(n, c, h, w)


class Dense:
    def __init__(self, in_features, out_features, rng):
        self.W = rng.normal(scale=np.sqrt(2.0 / in_features), size=(out_features, in_features))
        self.b = np.zeros(out_features)

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.W.shape[1]:
            raise ShapeError(("n", self.W.shape[1]), x.shape, "dense input")
        self._x = x
        return x @ self.W.T + self.b

    def backward(self, grad_out):
        self.dW = grad_out.T @ self._x
        self.db = grad_out.sum(axis=0)
        return grad_out @ self.W

    def parameters(self):
        return {"W": self.W, "b": self.b}

    def gradients(self):
        return {"W": self.dW, "b": self.db}


def softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def cross_entropy(logits, labels):
    """Mean cross-entropy and its gradient with respect to the logits."""
    probs = softmax(logits)
    n = logits.shape[0]
    loss = -np.log(probs[np.arange(n), labels] + 1e-300).mean()
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n
