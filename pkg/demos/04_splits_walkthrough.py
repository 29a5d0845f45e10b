#!/usr/bin/env python3
# Generate a small corpus, then build the two split families on top of it.

import tempfile
from pathlib import Path

from relscope import SynthSpec, default_taxonomy, generate, make_ac_split, make_sr_splits
from relscope.annotations import agreement_by_pair, consistency_filter, load_annotations, load_pairs
from relscope.splits import load_album_index, load_pair_list

tax = default_taxonomy()

with tempfile.TemporaryDirectory() as tmp:
    spec = SynthSpec(n_pairs=240, n_identities=60, n_photos=120, n_albums=16,
                     noise=0.05, margin=5.0, seed=42)
    generate(spec, tmp, write_features=False)
    root = Path(tmp)

    pairs = {p.pair_id: p for p in load_pairs(root / "pairs.tsv")}
    records = load_annotations(root / "annotations.tsv", tax, known_pairs=set(pairs))
    results = agreement_by_pair(records)
    truths = consistency_filter((r for r in results.values() if r), 3, tax)
    truth_ids = {t.pair_id for t in truths}
    print(f"{len(truths)} of {len(results)} pairs reach agreement >= 3")

    albums = load_album_index(root / "albums.tsv")
    preserved = [p for p in load_pair_list(root / "preserved_test.txt") if p in truth_ids]

    ac = make_ac_split(truths, albums, preserved, n_val_albums=8, seed=1)
    print(f"\nAC split: {len(ac.train)} train / {len(ac.val)} val / {len(ac.test)} test")
    print(f"  validation albums: {sorted({albums[p] for p in ac.val})}")

    print("\nSR splits (leave one relation out; single-member domains are never held out):")
    for manifest, diag in make_sr_splits(truths, pairs, tax, seed=1)[:5]:
        print(f"  hold out {manifest.held_out:<22} "
              f"{len(manifest.train):>3} train / {len(manifest.val):>2} val / "
              f"{len(manifest.test):>2} test  ({len(diag.discarded)} discarded by identity rule)")
    print("  ...")
