#!/usr/bin/env python3
# The whole pipeline on a synthetic corpus: generation, consensus, splits,
# fusion, training, evaluation, attribute contributions. Equivalent to
# `relscope run-all` at a reduced scale so it finishes in a few seconds.

import json
import tempfile
from pathlib import Path

from relscope.cli import RunAllConfig, run_all
from relscope.evaluation import load_contribution_tsv

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "bench"
    summary = run_all(RunAllConfig(
        out=out, seed=0,
        n_pairs=320, n_identities=80, n_photos=160, n_albums=16,
        noise=0.1, margin=10.0, epochs=20,
    ))
    print("headline numbers:")
    for key in ("retained_fraction", "relation_accuracy", "domain_accuracy",
                "domain_accuracy_coarsened", "generalization_accuracy"):
        print(f"  {key}: {summary[key]:.4f}")

    print("\nattribute contributions (x: domain ratio, y: relation ratio):")
    for p in sorted(load_contribution_tsv(out / "eval" / "contrib.tsv"),
                    key=lambda p: -(p.x + p.y)):
        print(f"  {p.attribute:<18} x={p.x:.3f} y={p.y:.3f}")

    report = json.loads((out / "eval" / "generalization_report.json").read_text())
    print("\nper-held-out-relation domain accuracy (first five):")
    for name, acc in list(report["extras"]["per_held_out_relation"].items())[:5]:
        print(f"  {name:<22} {acc:.3f}")
