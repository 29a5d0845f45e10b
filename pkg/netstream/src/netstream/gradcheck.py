"""Central finite-difference verification of the analytic gradients."""

from __future__ import annotations

import numpy as np

from .layers import cross_entropy


def parameter_group_errors(net, batch_a, batch_b, labels, h: float = 1e-4, samples: int = 6, seed: int = 0):
    """Max relative error per parameter group on a fixed batch.

    For each parameter array a few entries are perturbed by +-h and the
    loss difference is compared against the analytic gradient. Relative
    error is |analytic - numeric| / max(|analytic| + |numeric|, 1e-12).

    Entries whose +-h interval straddles a ReLU or pooling kink make the
    finite difference meaningless (the loss is not differentiable there);
    they are detected by step-halving inconsistency and resampled.
    """
    rng = np.random.default_rng(seed)
    logits, _ = net.forward(batch_a, batch_b)
    _, grad_logits = cross_entropy(logits, labels)
    net.backward(grad_logits)
    analytic = {name: g.copy() for name, g in net.gradients().items()}
    params = net.parameters()

    def loss_now():
        current, _ = net.forward(batch_a, batch_b)
        value, _ = cross_entropy(current, labels)
        return value

    def central_difference(flat, idx, step):
        original = flat[idx]
        flat[idx] = original + step
        loss_plus = loss_now()
        flat[idx] = original - step
        loss_minus = loss_now()
        flat[idx] = original
        return (loss_plus - loss_minus) / (2 * step)

    errors = {}
    for name, array in params.items():
        worst = 0.0
        flat = array.reshape(-1)
        wanted = min(samples, flat.size)
        checked = 0
        for idx in rng.permutation(flat.size):
            if checked == wanted:
                break
            numeric = central_difference(flat, idx, h)
            halved = central_difference(flat, idx, h / 2)
            if abs(numeric - halved) > 1e-4 * max(abs(numeric) + abs(halved), 1e-8):
                continue  # kink inside the difference interval
            a = analytic[name].reshape(-1)[idx]
            worst = max(worst, abs(a - numeric) / max(abs(a) + abs(numeric), 1e-12))
            checked += 1
        errors[name] = worst
    return errors
