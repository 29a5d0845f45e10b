"""Pair-image loading and the synthetic image task used by the tests.

Region crops live in one directory as ``<pair_id>_a.png`` and
``<pair_id>_b.png``; they are read as grayscale and scaled to [0, 1].
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ShapeError


def load_pair_images(directory, input_size: int):
    """Returns (pair_ids, batch_a, batch_b) sorted by pair id.

    Every ``*_a.png`` must have a matching ``*_b.png`` of the exact input
    size; crops are expected pre-scaled.
    """
    directory = Path(directory)
    ids = sorted(p.name[:-6] for p in directory.glob("*_a.png"))
    if not ids:
        raise FileNotFoundError(f"no *_a.png crops under {directory}")
    stacks = {"a": [], "b": []}
    for pair_id in ids:
        for side in ("a", "b"):
            path = directory / f"{pair_id}_{side}.png"
            if not path.exists():
                raise FileNotFoundError(f"missing crop {path}")
            img = np.asarray(Image.open(path).convert("L"), dtype=np.float64) / 255.0
            if img.shape != (input_size, input_size):
                raise ShapeError((input_size, input_size), img.shape, str(path))
            stacks[side].append(img[None])
    return ids, np.stack(stacks["a"]), np.stack(stacks["b"])


def save_pair_images(directory, pair_ids, batch_a, batch_b):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for pair_id, img_a, img_b in zip(pair_ids, batch_a, batch_b):
        for side, img in (("a", img_a), ("b", img_b)):
            data = np.clip(np.asarray(img)[0] * 255.0, 0, 255).astype(np.uint8)
            Image.fromarray(data, mode="L").save(directory / f"{pair_id}_{side}.png")


def bright_side_dataset(n: int, input_size: int = 32, seed: int = 0):
    """Linearly separable two-class toy task: class 0 pairs are bright on
    the left half of both crops, class 1 on the right."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    half = input_size // 2
    batches = []
    for _ in range(2):  # one draw per stream
        base = 0.1 + 0.1 * rng.random((n, 1, input_size, input_size))
        bright = 0.75 + 0.1 * rng.random((n, 1, input_size, input_size))
        batch = base.copy()
        for i, label in enumerate(labels):
            sl = slice(0, half) if label == 0 else slice(half, input_size)
            batch[i, :, :, sl] = bright[i, :, :, sl]
        batches.append(np.clip(batch, 0.0, 1.0))
    return batches[0], batches[1], labels
