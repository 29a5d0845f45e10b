"""Pair-embedding export in the core pipeline's feature-file format."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def export_fc7(net, pair_ids, batch_a, batch_b, path) -> int:
    """Write one TSV row of fc7 activations per pair; returns the row count.

    The header is ``pair_id v0 ... v{fc7-1}`` and floats are serialized at
    full round-trip precision, matching the feature files the downstream
    fusion stage ingests. Identical weights and inputs write identical
    bytes.
    """
    _, activations = net.forward(batch_a, batch_b)
    dim = activations.shape[1]
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("\t".join(["pair_id"] + [f"v{i}" for i in range(dim)]) + "\n")
        for pair_id, row in zip(pair_ids, activations):
            fh.write(str(pair_id) + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
    return len(pair_ids)
