"""Acceptance suite: one test per headline criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Tolerances and runtime budgets are pinned here and nowhere else.
"""

import time

import numpy as np
import pytest

from corpus_fixtures import (
    marginal_fixture_records,
    oracle_agreement,
    random_table,
    record,
    recount_statistics,
)
from svm_oracle import grid_min_objective
from relscope.annotations import (
    agreement_by_pair,
    compute_agreement,
    consistency_filter,
    label_statistics,
    load_annotations,
    load_pairs,
)
from relscope.cli import RunAllConfig, run_all
from relscope.evaluation import contribution_points
from relscope.featstore import pool_proximity
from relscope.splits import load_album_index, load_pair_list, make_ac_split, make_sr_splits
from relscope.svm import SvmConfig, train
from relscope.synthgen import SynthSpec, generate
from relscope.taxonomy import default_taxonomy

TAX = default_taxonomy()


def _report(name, ok):
    print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


# ---------------------------------------------------------------------------


def test_agreement_oracle_1000_tables():
    """compute_agreement matches exhaustive subset enumeration, 100% of
    1,000 random tables, in under 10 seconds."""
    start = time.monotonic()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for trial in range(1000):
        records = random_table(rng, f"p{trial}", n_annotators=int(rng.integers(1, 6)))
        expected = oracle_agreement(records)
        result = compute_agreement(records)
        got = None if result is None else result.agr
        mismatches += got != expected
    elapsed = time.monotonic() - start
    _report(f"agreement oracle: {1000 - mismatches}/1000 exact in {elapsed:.2f}s",
            mismatches == 0 and elapsed < 10.0)


def test_agreement_caption_scenarios():
    """The four annotation scenarios reproduce agr = 5, 3, 1, 2 exactly."""
    gg = TAX.parse_relation("grandma-grandchild")
    col = TAX.parse_relation("colleagues")
    fri = TAX.parse_relation("friends")
    scenarios = [
        ([record(a, "s1", [gg]) for a in range(5)], 5),
        ([record(a, "s2", [col]) for a in range(3)]
         + [record(3, "s2", [col, fri]), record(4, "s2", [])], 3),
        ([record(a, "s3", [TAX.parse_relation(n)]) for a, n in enumerate(
            ["friends", "colleagues", "leader-subordinate", "trainer-trainee", "siblings"])], 1),
        ([record(0, "s4", [fri]), record(1, "s4", [fri]),
          record(2, "s4", [col]), record(3, "s4", [TAX.parse_relation("siblings")]),
          record(4, "s4", [TAX.parse_relation("classmates")])], 2),
    ]
    got = [compute_agreement(records).agr for records, _ in scenarios]
    expected = [agr for _, agr in scenarios]
    _report(f"caption scenarios: agr {got} == {expected}", got == expected)


def test_statistics_recount_and_reference_marginals():
    """Percentages match an independent recount to 1e-12; the marginal
    fixture prints the reference numbers."""
    rng = np.random.default_rng(77)
    records = []
    for i in range(200):
        records.extend(random_table(rng, f"p{i:03d}"))
    report = label_statistics(records, TAX)
    recount = recount_statistics(records)
    ok = True
    for k, count in report.per_record_label_counts.items():
        ok &= abs(count / report.n_records - recount["label_counts"][k] / recount["n_records"]) < 1e-12
    for k, count in report.distinct_relation_counts.items():
        voted = recount["n_pairs"] - recount["n_skipped"]
        ok &= abs(count / report.n_voted_pairs - recount["distinct_counts"][k] / voted) < 1e-12
    for k, count in report.agr_histogram.items():
        ok &= abs(count / report.n_pairs - recount["agr_counts"][k] / recount["n_pairs"]) < 1e-12
    ok &= abs(report.maybe_fraction - recount["maybe_fraction"]) < 1e-12

    text = label_statistics(marginal_fixture_records(), TAX).render()
    wanted = ["1: 92.3%", "2: 7.5%", "3: 0.3%",
              "1: 53%", "2: 38.8%", "3: 7.4%", "4: 0.8%",
              "agr=5: 42%", "agr=4: 19.9%", "agr=3: 20.7%"]
    missing = [w for w in wanted if w not in text]
    ok &= not missing
    _report(f"statistics recount 1e-12 and reference marginals (missing: {missing})", ok)


def test_split_invariants_twenty_seeds():
    """AC and SR manifests satisfy every structural invariant for 20 seeds
    inside 30 seconds."""
    start = time.monotonic()
    import tempfile
    from pathlib import Path
    with tempfile.TemporaryDirectory() as tmp:
        spec = SynthSpec(n_pairs=400, n_identities=80, n_photos=200, n_albums=20,
                         noise=0.05, margin=5.0, seed=99)
        generate(spec, tmp, TAX, write_features=False)
        pairs = {p.pair_id: p for p in load_pairs(Path(tmp) / "pairs.tsv")}
        records = load_annotations(Path(tmp) / "annotations.tsv", TAX, known_pairs=set(pairs))
        truths = consistency_filter(
            (r for r in agreement_by_pair(records).values() if r), 3, TAX)
        truth_by_id = {t.pair_id: t for t in truths}
        albums = load_album_index(Path(tmp) / "albums.tsv")
        preserved = [p for p in load_pair_list(Path(tmp) / "preserved_test.txt") if p in truth_by_id]
        lovers = TAX.parse_relation("lovers/spouses")
        lover_pairs = {t.pair_id for t in truths if lovers in t.relations}

        checks = 0
        for seed in range(20):
            ac = make_ac_split(truths, albums, preserved, seed=seed)
            train_s, val_s, test_s = set(ac.train), set(ac.val), set(ac.test)
            assert not (train_s & val_s or train_s & test_s or val_s & test_s)
            assert test_s == set(preserved)
            assert not {albums[p] for p in ac.train} & {albums[p] for p in ac.val}
            for manifest, diag in make_sr_splits(truths, pairs, TAX, seed=seed):
                held = TAX.parse_relation(manifest.held_out)
                train_m, val_m, test_m = set(manifest.train), set(manifest.val), set(manifest.test)
                assert not (train_m & val_m or train_m & test_m or val_m & test_m)
                assert all(held in truth_by_id[p].relations for p in test_m)
                assert all(held not in truth_by_id[p].relations for p in train_m | val_m)
                assert lover_pairs <= train_m
                fold_sizes = np.bincount(list(diag.identity_folds.values()), minlength=10)
                assert fold_sizes.max() - fold_sizes.min() <= 1
                train_ids = {i for p in train_m for i in pairs[p].identities}
                val_ids = {i for p in val_m for i in pairs[p].identities}
                assert not train_ids & val_ids
                checks += 1
    elapsed = time.monotonic() - start
    _report(f"split invariants: 20 seeds x (AC + {checks // 20} SR) in {elapsed:.1f}s",
            checks == 20 * 15 and elapsed < 30.0)


def test_svm_oracle_ten_problems():
    """Trained objective within 1e-3 relative of the exhaustive grid
    minimum on 10 random 2-D 2-class problems; monotone checkpoints;
    bitwise seeded determinism."""
    rng = np.random.default_rng(555)
    lambdas = [0.1, 0.1, 0.2, 0.2, 0.2, 0.2, 0.5, 0.5, 0.5, 0.5]
    worst_ratio = 0.0
    for problem, lam in enumerate(lambdas):
        X = rng.normal(scale=1.5, size=(20, 2))
        direction = rng.normal(size=2)
        y = [1 if v >= 0 else -1 for v in X @ direction + 0.3 * rng.normal(size=20)]
        if len(set(y)) < 2:
            y[0] = -y[1]
        cfg = SvmConfig(lambda_=lam, epochs=8000, seed=problem)
        model = train(X, y, cfg)
        short = SvmConfig(lambda_=lam, epochs=60, seed=problem)
        assert train(X, y, short).weights.tobytes() == train(X, y, short).weights.tobytes()
        assert train(X, y, short).biases.tobytes() == train(X, y, short).biases.tobytes()
        assert np.all(np.diff(model.checkpoint_objectives, axis=0) <= 1e-9)
        idx = model.classes.index(1)
        oracle = grid_min_objective(np.asarray(X, float), np.asarray(y, float), lam,
                                    seed_point=(model.weights[idx], model.biases[idx]))
        ratio = model.objectives[idx] / oracle
        worst_ratio = max(worst_ratio, ratio)
        assert model.objectives[idx] <= oracle * (1.0 + 1e-3), (
            f"problem {problem}: trained {model.objectives[idx]} vs grid {oracle}")
        assert model.objectives[idx] >= oracle * 0.95  # oracle sanity
    _report(f"svm grid oracle: 10/10 within 1e-3 (worst ratio {worst_ratio:.6f})",
            worst_ratio <= 1.001)


def test_contribution_arithmetic_reference_table():
    """Feeding the reference accuracies reproduces all 12 coordinate pairs
    to 3 decimals."""
    reference = {
        "head_age": (42.8, 56.8), "head_gender": (38.0, 53.8),
        "head_loc_scale": (30.8, 45.0), "head_appearance": (31.5, 48.4),
        "head_pose": (34.7, 52.3), "face_emotion": (37.7, 55.3),
        "body_age": (31.0, 57.4), "body_gender": (46.6, 58.0),
        "body_loc_scale": (27.7, 44.2), "clothing": (51.4, 60.3),
        "proximity": (39.6, 55.4), "activity": (52.4, 64.5),
    }
    all_rel, all_dom = 57.2, 67.8
    points = {p.attribute: p for p in contribution_points(
        {k: (r / 100, d / 100) for k, (r, d) in reference.items()},
        (all_rel / 100, all_dom / 100))}
    bad = []
    for name, (rel, dom) in reference.items():
        if round(points[name].x, 3) != round(dom / all_dom, 3):
            bad.append(name)
        if round(points[name].y, 3) != round(rel / all_rel, 3):
            bad.append(name)
    ok = (not bad
          and round(points["body_age"].x, 3) == 0.847
          and round(points["body_age"].y, 3) == 0.542
          and round(points["activity"].x, 3) == 0.951
          and round(points["activity"].y, 3) == 0.916)
    _report(f"contribution arithmetic: 12/12 points to 3 decimals (bad: {bad})", ok)


def test_end_to_end_three_seeds(tmp_path):
    """run-all at the default synthetic scale: relation accuracy >= 0.95,
    domain >= relation, leave-one-out generalization > 0.25, three seeds,
    under 2 minutes."""
    start = time.monotonic()
    rows = []
    ok = True
    for seed in (0, 1, 2):
        summary = run_all(RunAllConfig(out=tmp_path / f"seed{seed}", seed=seed))
        rows.append((seed, summary["relation_accuracy"], summary["domain_accuracy"],
                     summary["generalization_accuracy"]))
        ok &= summary["relation_accuracy"] >= 0.95
        ok &= summary["domain_accuracy"] >= summary["relation_accuracy"]
        ok &= summary["generalization_accuracy"] > 0.25
    elapsed = time.monotonic() - start
    ok &= elapsed < 120.0
    detail = "  ".join(f"seed {s}: rel {r:.3f} dom {d:.3f} gen {g:.3f}" for s, r, d, g in rows)
    _report(f"end-to-end synthetic: {detail} in {elapsed:.0f}s", ok)


def test_proximity_pooling_criteria():
    """Full-shape reduction to 2500 dims, the hand-computed toy case, and
    monotonicity over 100 random tensors."""
    rng = np.random.default_rng(31)
    full = rng.standard_normal((338, 50, 50))
    pooled = pool_proximity(full)
    ok = pooled.shape == (2500,)
    ok &= np.array_equal(pooled, full.max(axis=0).reshape(-1))
    toy = np.array([[[1, 2], [3, 4]], [[4, 3], [2, 1]]], dtype=float)
    ok &= np.array_equal(pool_proximity(toy, (2, 2, 2)), [4, 3, 3, 4])
    monotone = True
    for _ in range(100):
        tensor = rng.standard_normal((4, 3, 3))
        base = pool_proximity(tensor, (4, 3, 3))
        bumped = tensor.copy()
        c, i, j = rng.integers(4), rng.integers(3), rng.integers(3)
        bumped[c, i, j] += abs(rng.normal()) + 0.05
        monotone &= bool(np.all(pool_proximity(bumped, (4, 3, 3)) >= base))
    ok &= monotone
    _report("proximity pooling: 2500-dim reduction, toy case, monotonicity 100/100", ok)
