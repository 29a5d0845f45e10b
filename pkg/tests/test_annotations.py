import numpy as np
import pytest

from corpus_fixtures import (
    MARGINAL_EXPECTED,
    marginal_fixture_records,
    oracle_agreement,
    random_table,
    record,
    recount_statistics,
)
from relscope.annotations import (
    AnnotatorRecord,
    BBox,
    LabelMark,
    Person,
    PersonPair,
    agreement_by_pair,
    compute_agreement,
    consistency_filter,
    label_statistics,
    load_annotations,
    load_groundtruth,
    load_pairs,
    save_annotations,
    save_groundtruth,
    save_pairs,
)
from relscope.errors import IngestError, InputError
from relscope.taxonomy import default_taxonomy

TAX = default_taxonomy()


def rel(name):
    return TAX.parse_relation(name)


# ---------------------------------------------------------------------------
# types


def test_bbox_validation():
    with pytest.raises(InputError):
        BBox(0, 0, 0, 10)
    with pytest.raises(InputError):
        BBox(0, 0, 10, -1)


def test_bbox_clamping():
    box = BBox(-10, 5, 30, 200).clamped(100, 100)
    assert (box.x, box.y, box.w, box.h) == (0, 5, 20, 95)
    with pytest.raises(InputError):
        BBox(200, 5, 30, 30).clamped(100, 100)  # fully outside


def test_pair_identities_must_differ():
    head = BBox(0, 0, 10, 10)
    with pytest.raises(InputError):
        PersonPair("p0", "ph0", Person("i1", head), Person("i1", head), 100, 100)


def test_record_limits():
    with pytest.raises(InputError):
        AnnotatorRecord("a", "p", tuple(LabelMark(i) for i in range(4)))
    with pytest.raises(InputError):
        AnnotatorRecord("a", "p", (LabelMark(1), LabelMark(1, maybe=True)))


# ---------------------------------------------------------------------------
# agreement


def test_unanimous_single_label():
    records = [record(a, "p1", [rel("grandma-grandchild")]) for a in range(5)]
    result = compute_agreement(records)
    assert result.agr == 5
    assert result.consensus == frozenset({rel("grandma-grandchild")})
    assert result.n_annotators == 5


def test_superset_vote_not_counted():
    # three single votes, one superset vote, one skip: the superset voter
    # supports the relation but is not in exact agreement
    records = [record(a, "p1", [rel("colleagues")]) for a in range(3)]
    records.append(record(3, "p1", [rel("colleagues"), rel("friends")]))
    records.append(record(4, "p1", []))
    result = compute_agreement(records)
    assert result.agr == 3
    assert result.n_annotators == 4
    assert result.consensus == frozenset({rel("colleagues")})


def test_all_distinct_gives_agr_one():
    names = ["friends", "colleagues", "leader-subordinate", "trainer-trainee", "siblings"]
    records = [record(a, "p1", [rel(n)]) for a, n in enumerate(names)]
    result = compute_agreement(records)
    assert result.agr == 1
    assert result.consensus is None  # below threshold 3


def test_two_vote_agreement():
    records = [
        record(0, "p1", [rel("friends")]),
        record(1, "p1", [rel("friends")]),
        record(2, "p1", [rel("colleagues")]),
        record(3, "p1", [rel("siblings")]),
        record(4, "p1", [rel("classmates")]),
    ]
    result = compute_agreement(records)
    assert result.agr == 2
    assert result.labels == frozenset({rel("friends")})


def test_all_skipped_returns_none():
    records = [record(a, "p1", []) for a in range(5)]
    assert compute_agreement(records) is None


def test_maybe_ignored_for_equality_but_tracked():
    records = [
        record(0, "p1", [rel("friends")], maybes=[rel("friends")]),
        record(1, "p1", [rel("friends")]),
        record(2, "p1", [rel("friends")]),
    ]
    result = compute_agreement(records)
    assert result.agr == 3
    assert result.maybe_fraction == pytest.approx(1 / 3)


def test_label_order_within_record_irrelevant():
    a = [record(0, "p", [1, 2]), record(1, "p", [2, 1]), record(2, "p", [1, 2])]
    assert compute_agreement(a).agr == 3


def test_annotator_order_irrelevant():
    rng = np.random.default_rng(4)
    for trial in range(50):
        records = random_table(rng, f"p{trial}")
        res = compute_agreement(records)
        shuffled = list(records)
        rng.shuffle(shuffled)
        res2 = compute_agreement(shuffled)
        if res is None:
            assert res2 is None
        else:
            assert (res.agr, res.labels) == (res2.agr, res2.labels)


def test_group_sizes_sum_to_voted_records():
    rng = np.random.default_rng(11)
    from collections import Counter
    for trial in range(100):
        records = random_table(rng, f"p{trial}")
        voted = [r for r in records if not r.skipped]
        groups = Counter(r.relation_set for r in voted)
        assert sum(groups.values()) == len(voted)


def test_agreement_matches_exhaustive_oracle():
    rng = np.random.default_rng(123)
    for trial in range(500):
        records = random_table(rng, f"p{trial}")
        expected = oracle_agreement(records)
        result = compute_agreement(records)
        if expected is None:
            assert result is None
        else:
            assert result.agr == expected


def test_unique_consensus_at_threshold_three():
    # with five annotators two groups of size >= 3 cannot coexist
    rng = np.random.default_rng(7)
    for trial in range(300):
        records = random_table(rng, f"p{trial}")
        result = compute_agreement(records)
        if result is None or result.agr < 3:
            continue
        from collections import Counter
        groups = Counter(r.relation_set for r in records if not r.skipped)
        assert sum(1 for n in groups.values() if n >= 3) == 1


def test_records_must_share_pair():
    with pytest.raises(InputError):
        compute_agreement([record(0, "p1", [1]), record(1, "p2", [1])])


# ---------------------------------------------------------------------------
# consistency filter


def _synthetic_results(rng, n_pairs=60):
    records = []
    for i in range(n_pairs):
        records.extend(random_table(rng, f"p{i:03d}"))
    return records, agreement_by_pair(records)


def test_filter_threshold_one_keeps_all_voted():
    rng = np.random.default_rng(5)
    records, results = _synthetic_results(rng)
    voted_pairs = {r.pair_id for r in records if not r.skipped}
    truths = consistency_filter((r for r in results.values() if r), 1, TAX)
    assert {t.pair_id for t in truths} == voted_pairs


def test_filter_threshold_five_requires_unanimity():
    rng = np.random.default_rng(6)
    records, results = _synthetic_results(rng)
    truths = consistency_filter((r for r in results.values() if r), 5, TAX)
    by_pair = {}
    for r in records:
        by_pair.setdefault(r.pair_id, []).append(r)
    for t in truths:
        voted = [r for r in by_pair[t.pair_id] if not r.skipped]
        assert len(voted) == 5
        assert len({r.relation_set for r in voted}) == 1


def test_filter_monotone_in_threshold():
    rng = np.random.default_rng(9)
    _, results = _synthetic_results(rng, n_pairs=120)
    kept = [
        {t.pair_id for t in consistency_filter((r for r in results.values() if r), thr, TAX)}
        for thr in range(1, 6)
    ]
    for lower, higher in zip(kept, kept[1:]):
        assert higher <= lower


def test_groundtruth_primary_and_domain():
    records = [record(a, "p1", [rel("mother-child"), rel("friends")]) for a in range(3)]
    truths = consistency_filter([compute_agreement(records)], 3, TAX)
    (t,) = truths
    assert t.primary == min(rel("mother-child"), rel("friends"))
    assert t.domain == TAX.domain_of(t.primary)
    assert t.cross_domain  # Attachment + Reciprocity


def test_single_domain_set_not_flagged():
    records = [record(a, "p1", [rel("mother-child"), rel("father-child")]) for a in range(3)]
    (t,) = consistency_filter([compute_agreement(records)], 3, TAX)
    assert not t.cross_domain


# ---------------------------------------------------------------------------
# statistics


def test_statistics_match_independent_recount():
    rng = np.random.default_rng(21)
    records = []
    for i in range(150):
        records.extend(random_table(rng, f"p{i:03d}"))
    report = label_statistics(records, TAX)
    recount = recount_statistics(records)
    assert report.n_pairs == recount["n_pairs"]
    assert report.n_skipped_pairs == recount["n_skipped"]
    assert report.n_records == recount["n_records"]
    assert report.per_record_label_counts == recount["label_counts"]
    assert report.distinct_relation_counts == recount["distinct_counts"]
    assert report.agr_histogram == recount["agr_counts"]
    assert abs(report.maybe_fraction - recount["maybe_fraction"]) < 1e-12
    for k, count in report.per_record_label_counts.items():
        assert abs(count / report.n_records - recount["label_counts"][k] / recount["n_records"]) < 1e-12


def test_marginal_fixture_counts():
    records = marginal_fixture_records()
    report = label_statistics(records, TAX)
    assert report.n_pairs == MARGINAL_EXPECTED["n_pairs"]
    assert report.n_records == MARGINAL_EXPECTED["n_records"]
    assert report.per_record_label_counts == MARGINAL_EXPECTED["per_record"]
    assert report.distinct_relation_counts == MARGINAL_EXPECTED["distinct"]
    assert report.agr_histogram == MARGINAL_EXPECTED["agr"]


def test_marginal_fixture_report_formats():
    report = label_statistics(marginal_fixture_records(), TAX)
    text = report.render()
    assert "1: 92.3%" in text and "2: 7.5%" in text and "3: 0.3%" in text
    assert "1: 53%" in text and "2: 38.8%" in text and "3: 7.4%" in text and "4: 0.8%" in text
    assert "agr=5: 42%" in text and "agr=4: 19.9%" in text and "agr=3: 20.7%" in text


def test_marginal_fixture_retained_fraction():
    report = label_statistics(marginal_fixture_records(), TAX)
    assert report.retained_fraction(3) == pytest.approx(0.826)
    results = agreement_by_pair(marginal_fixture_records())
    truths = consistency_filter((r for r in results.values() if r), 3, TAX)
    assert len(truths) / len(results) == pytest.approx(0.826)


def test_consistency_counts_sum_relations_to_domains():
    report = label_statistics(marginal_fixture_records(), TAX)
    for level, counts in report.consistency_counts.items():
        assert sum(counts["relations"].values()) == sum(counts["domains"].values())


# ---------------------------------------------------------------------------
# file I/O


def _tiny_corpus(tmp_path):
    head = BBox(10, 10, 20, 20)
    pairs = [
        PersonPair("p0", "ph0", Person("i0", head), Person("i1", BBox(50, 10, 20, 20)), 200, 200),
        PersonPair("p1", "ph1", Person("i2", head), Person("i3", BBox(80, 30, 25, 25)), 200, 200),
    ]
    records = [
        record(0, "p0", [rel("friends")]),
        record(1, "p0", [rel("friends")], maybes=[rel("friends")]),
        record(2, "p0", []),
        record(0, "p1", [rel("mother-child"), rel("grandma-grandchild")]),
    ]
    pairs_path = tmp_path / "pairs.tsv"
    ann_path = tmp_path / "annotations.tsv"
    save_pairs(pairs_path, pairs)
    save_annotations(ann_path, records, TAX)
    return pairs, records, pairs_path, ann_path


def test_round_trip_files(tmp_path):
    pairs, records, pairs_path, ann_path = _tiny_corpus(tmp_path)
    assert load_pairs(pairs_path) == pairs
    assert load_annotations(ann_path, TAX) == records


def test_ingest_rejects_unknown_relation(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("annotator_id\tpair_id\tlabels\na0\tp0\tboss\n", encoding="utf-8")
    with pytest.raises(IngestError) as err:
        load_annotations(path, TAX)
    assert ":2:" in str(err.value)


def test_ingest_rejects_unknown_pair(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("annotator_id\tpair_id\tlabels\na0\tpX\tfriends\n", encoding="utf-8")
    with pytest.raises(IngestError):
        load_annotations(path, TAX, known_pairs={"p0"})


def test_ingest_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("annotator\tpair\tlabels\n", encoding="utf-8")
    with pytest.raises(IngestError):
        load_annotations(path, TAX)


def test_ingest_rejects_too_many_labels(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text(
        "annotator_id\tpair_id\tlabels\na0\tp0\tfriends;siblings;classmates;colleagues\n",
        encoding="utf-8")
    with pytest.raises(IngestError):
        load_annotations(path, TAX)


def test_groundtruth_round_trip(tmp_path):
    records = [record(a, "p1", [rel("mother-child")]) for a in range(4)]
    truths = consistency_filter([compute_agreement(records)], 3, TAX)
    path = tmp_path / "gt.json"
    save_groundtruth(path, truths, TAX)
    assert load_groundtruth(path, TAX) == truths
