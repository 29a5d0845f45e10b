#!/usr/bin/env python3
# Exact-set agreement between annotators, and how consensus ground truth falls out.

from relscope import compute_agreement, consistency_filter, default_taxonomy
from relscope.annotations import AnnotatorRecord, LabelMark

tax = default_taxonomy()


def rec(annotator, pair, names, skip=False):
    marks = () if skip else tuple(LabelMark(tax.parse_relation(n)) for n in names)
    return AnnotatorRecord(f"a{annotator}", pair, marks)


scenarios = {
    "unanimous": [rec(i, "x1", ["grandma-grandchild"]) for i in range(5)],
    "superset vote not counted": [
        rec(0, "x2", ["colleagues"]), rec(1, "x2", ["colleagues"]), rec(2, "x2", ["colleagues"]),
        rec(3, "x2", ["colleagues", "friends"]),  # supports colleagues, but not an exact match
        rec(4, "x2", [], skip=True),
    ],
    "all different": [
        rec(i, "x3", [n]) for i, n in enumerate(
            ["friends", "colleagues", "leader-subordinate", "trainer-trainee", "siblings"])
    ],
    "two agree": [
        rec(0, "x4", ["friends"]), rec(1, "x4", ["friends"]),
        rec(2, "x4", ["colleagues"]), rec(3, "x4", ["siblings"]), rec(4, "x4", ["classmates"]),
    ],
}

results = []
for name, records in scenarios.items():
    res = compute_agreement(records)
    members = sorted(tax.relation_name(r) for r in res.labels)
    print(f"{name:<28} agr={res.agr}  top set={members}  consensus={res.consensus is not None}")
    results.append(res)

print("\nground truth at the usual threshold (3 of 5 annotators):")
for t in consistency_filter(results, 3, tax):
    print(f"  {t.pair_id}: {sorted(tax.relation_name(r) for r in t.relations)}"
          f" -> primary {tax.relation_name(t.primary)!r}, domain {tax.domain_name(t.domain)!r}")
