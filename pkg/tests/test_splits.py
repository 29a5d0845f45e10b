import numpy as np
import pytest

from relscope.annotations import (
    agreement_by_pair,
    consistency_filter,
    load_annotations,
    load_pairs,
)
from relscope.errors import InputError, SplitError
from relscope.splits import (
    SplitManifest,
    always_train_relations,
    load_album_index,
    load_pair_list,
    make_ac_split,
    make_sr_splits,
    save_album_index,
    save_pair_list,
)
from relscope.synthgen import SynthSpec, generate
from relscope.taxonomy import default_taxonomy

TAX = default_taxonomy()


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    spec = SynthSpec(n_pairs=400, n_identities=80, n_photos=200, n_albums=20,
                     noise=0.05, margin=5.0, seed=13)
    generate(spec, out, TAX, write_features=False)
    pairs = load_pairs(out / "pairs.tsv")
    pairs_by_id = {p.pair_id: p for p in pairs}
    records = load_annotations(out / "annotations.tsv", TAX, known_pairs=set(pairs_by_id))
    results = agreement_by_pair(records)
    truths = consistency_filter((r for r in results.values() if r), 3, TAX)
    albums = load_album_index(out / "albums.tsv")
    gt_ids = {t.pair_id for t in truths}
    preserved = [p for p in load_pair_list(out / "preserved_test.txt") if p in gt_ids]
    return truths, pairs_by_id, albums, preserved


# ---------------------------------------------------------------------------
# AC splits


def test_ac_deterministic(corpus):
    truths, _, albums, preserved = corpus
    a = make_ac_split(truths, albums, preserved, seed=7)
    b = make_ac_split(truths, albums, preserved, seed=7)
    assert a == b
    c = make_ac_split(truths, albums, preserved, seed=8)
    assert c != a


def test_ac_partitions_and_preserves_test(corpus):
    truths, _, albums, preserved = corpus
    manifest = make_ac_split(truths, albums, preserved, seed=3)
    assert sorted(manifest.test) == sorted(preserved)
    train, val, test = set(manifest.train), set(manifest.val), set(manifest.test)
    assert not (train & val or train & test or val & test)
    assert train | val | test == {t.pair_id for t in truths}


def test_ac_album_atomicity(corpus):
    truths, _, albums, preserved = corpus
    manifest = make_ac_split(truths, albums, preserved, seed=3)
    train_albums = {albums[p] for p in manifest.train}
    val_albums = {albums[p] for p in manifest.val}
    assert not train_albums & val_albums
    assert len(val_albums) == 8


def test_ac_three_album_recount():
    # tiny corpus: validation must be exactly one whole album
    from corpus_fixtures import record
    from relscope.annotations import compute_agreement
    truths = consistency_filter(
        [compute_agreement([record(a, f"p{i}", [i % 16]) for a in range(3)]) for i in range(9)],
        3, TAX)
    albums = {f"p{i}": f"al{i % 3}" for i in range(9)}
    preserved = ["p0"]  # al0 keeps its other pairs eligible
    manifest = make_ac_split(truths, albums, preserved, n_val_albums=1, seed=0)
    val_albums = {albums[p] for p in manifest.val}
    assert len(val_albums) == 1
    chosen = val_albums.pop()
    expected = {p for p, a in albums.items() if a == chosen and p not in preserved}
    assert set(manifest.val) == expected


def test_ac_errors():
    from corpus_fixtures import record
    from relscope.annotations import compute_agreement
    truths = consistency_filter(
        [compute_agreement([record(a, f"p{i}", [0]) for a in range(3)]) for i in range(4)],
        3, TAX)
    albums = {f"p{i}": "al0" for i in range(4)}
    with pytest.raises(SplitError):
        make_ac_split(truths, albums, ["p0"], n_val_albums=2, seed=0)  # one album only
    with pytest.raises(SplitError):
        make_ac_split(truths, albums, ["missing"], n_val_albums=1, seed=0)
    with pytest.raises(InputError):
        make_ac_split(truths, {"p0": "al0"}, ["p0"], n_val_albums=1, seed=0)  # albums missing


# ---------------------------------------------------------------------------
# SR splits


def test_sr_produces_fifteen_manifests(corpus):
    truths, pairs_by_id, _, _ = corpus
    results = make_sr_splits(truths, pairs_by_id, TAX, seed=5)
    assert len(results) == 15
    held = [m.held_out for m, _ in results]
    assert "lovers/spouses" not in held
    assert len(set(held)) == 15


def test_always_train_relations_are_single_member_domains():
    names = [TAX.relation_name(r) for r in always_train_relations(TAX)]
    assert names == ["lovers/spouses"]


def test_sr_held_out_exclusive(corpus):
    truths, pairs_by_id, _, _ = corpus
    truth_by_id = {t.pair_id: t for t in truths}
    for manifest, _ in make_sr_splits(truths, pairs_by_id, TAX, seed=5):
        held = TAX.parse_relation(manifest.held_out)
        for pid in manifest.test:
            assert held in truth_by_id[pid].relations
        for pid in list(manifest.train) + list(manifest.val):
            assert held not in truth_by_id[pid].relations


def test_sr_lovers_always_in_train(corpus):
    truths, pairs_by_id, _, _ = corpus
    lovers = TAX.parse_relation("lovers/spouses")
    lover_pairs = {t.pair_id for t in truths if lovers in t.relations}
    assert lover_pairs
    for manifest, _ in make_sr_splits(truths, pairs_by_id, TAX, seed=5):
        in_train = lover_pairs & set(manifest.train)
        assert not lover_pairs & set(manifest.val)
        assert not lover_pairs & set(manifest.test)
        # only identity conflicts with validation may drop a lovers pair,
        # and dropping happens on the validation side, never here
        assert in_train == lover_pairs


def test_sr_identity_conflict_freedom(corpus):
    truths, pairs_by_id, _, _ = corpus
    for manifest, _ in make_sr_splits(truths, pairs_by_id, TAX, seed=5):
        train_ids = {i for p in manifest.train for i in pairs_by_id[p].identities}
        val_ids = {i for p in manifest.val for i in pairs_by_id[p].identities}
        assert not train_ids & val_ids


def test_sr_fold_balance(corpus):
    truths, pairs_by_id, _, _ = corpus
    for manifest, diag in make_sr_splits(truths, pairs_by_id, TAX, n_folds=10, seed=5):
        counts = np.zeros(10, dtype=int)
        for fold in diag.identity_folds.values():
            counts[fold] += 1
        assert counts.max() - counts.min() <= 1


def test_sr_discarded_pairs_straddle_or_conflict(corpus):
    truths, pairs_by_id, _, _ = corpus
    for manifest, diag in make_sr_splits(truths, pairs_by_id, TAX, seed=5):
        placed = set(manifest.train) | set(manifest.val) | set(manifest.test)
        for pid in diag.discarded:
            assert pid not in placed


def test_sr_deterministic(corpus):
    truths, pairs_by_id, _, _ = corpus
    a = make_sr_splits(truths, pairs_by_id, TAX, seed=5)
    b = make_sr_splits(truths, pairs_by_id, TAX, seed=5)
    assert [m for m, _ in a] == [m for m, _ in b]
    assert [m.seed for m, _ in a] == [5 + k for k in range(15)]


def test_sr_missing_relation_raises(corpus):
    truths, pairs_by_id, _, _ = corpus
    colleagues = TAX.parse_relation("colleagues")
    reduced = [t for t in truths if colleagues not in t.relations]
    with pytest.raises(SplitError) as err:
        make_sr_splits(reduced, pairs_by_id, TAX, seed=5)
    assert "colleagues" in str(err.value)


# ---------------------------------------------------------------------------
# serialization


def test_manifest_round_trip(tmp_path, corpus):
    truths, pairs_by_id, albums, preserved = corpus
    manifest = make_ac_split(truths, albums, preserved, seed=2)
    path = tmp_path / "ac.json"
    manifest.save(path)
    assert SplitManifest.load(path) == manifest


def test_manifest_rejects_overlap():
    with pytest.raises(SplitError):
        SplitManifest("x", "AC", None, 0, ("p1",), ("p1",), ())


def test_album_and_pair_list_round_trip(tmp_path):
    index = {"p1": "al0", "p2": "al1"}
    save_album_index(tmp_path / "albums.tsv", index)
    assert load_album_index(tmp_path / "albums.tsv") == index
    save_pair_list(tmp_path / "list.txt", ["p1", "p2"])
    assert load_pair_list(tmp_path / "list.txt") == ["p1", "p2"]
