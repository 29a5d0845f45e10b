"""Multi-annotator label handling: parsing, agreement, consensus ground truth.

Agreement between annotators is exact: two records agree only when their
relation-label sets are identical (uncertainty flags are ignored for the
comparison but preserved in the output). The size of the largest group of
identical records is the pair's agreement level ``agr``; pairs at or above
a consistency threshold become ground truth.

File formats
------------
Annotations: UTF-8 TSV with header ``annotator_id  pair_id  labels`` where
``labels`` is ``;``-separated entries ``relation[?]`` (``?`` marks an
uncertain vote) and an empty field means the annotator skipped the pair.

Pairs: UTF-8 TSV with header
``pair_id photo_id identity_a xa ya wa ha identity_b xb yb wb hb image_w image_h``.
"""

from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestError, InputError, RelscopeError, UnknownRelationError
from .taxonomy import Taxonomy

ANNOTATION_HEADER = ("annotator_id", "pair_id", "labels")
PAIRS_HEADER = (
    "pair_id", "photo_id",
    "identity_a", "xa", "ya", "wa", "ha",
    "identity_b", "xb", "yb", "wb", "hb",
    "image_w", "image_h",
)

MAX_LABELS_PER_RECORD = 3


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixel units, top-left origin."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise InputError(f"box sides must be positive, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def diagonal(self) -> float:
        return (self.w ** 2 + self.h ** 2) ** 0.5

    def clamped(self, image_w: float, image_h: float) -> "BBox":
        """Intersect with the image rectangle; identity when already inside."""
        x0 = min(max(self.x, 0.0), image_w)
        y0 = min(max(self.y, 0.0), image_h)
        x1 = min(max(self.x + self.w, 0.0), image_w)
        y1 = min(max(self.y + self.h, 0.0), image_h)
        if x1 <= x0 or y1 <= y0:
            raise InputError(f"box {self} lies outside the {image_w}x{image_h} image")
        if (x0, y0, x1, y1) == (self.x, self.y, self.x + self.w, self.y + self.h):
            return self
        return BBox(x0, y0, x1 - x0, y1 - y0)


@dataclass(frozen=True)
class Person:
    identity_id: str
    head: BBox


@dataclass(frozen=True)
class PersonPair:
    """Two annotated identities co-occurring in one photo."""

    pair_id: str
    photo_id: str
    person_a: Person
    person_b: Person
    image_w: float
    image_h: float

    def __post_init__(self):
        if self.person_a.identity_id == self.person_b.identity_id:
            raise InputError(f"pair {self.pair_id}: identities must differ")

    @property
    def identities(self) -> tuple[str, str]:
        return (self.person_a.identity_id, self.person_b.identity_id)


@dataclass(frozen=True)
class LabelMark:
    relation: int
    maybe: bool = False


@dataclass(frozen=True)
class AnnotatorRecord:
    """One annotator's vote for one pair; an empty label tuple is a skip."""

    annotator_id: str
    pair_id: str
    labels: tuple[LabelMark, ...] = ()

    def __post_init__(self):
        if len(self.labels) > MAX_LABELS_PER_RECORD:
            raise InputError(
                f"record {self.annotator_id}/{self.pair_id}: at most "
                f"{MAX_LABELS_PER_RECORD} labels per record, got {len(self.labels)}"
            )
        rels = [m.relation for m in self.labels]
        if len(set(rels)) != len(rels):
            raise InputError(f"record {self.annotator_id}/{self.pair_id}: duplicate relations")

    @property
    def skipped(self) -> bool:
        return not self.labels

    @property
    def relation_set(self) -> frozenset[int]:
        return frozenset(m.relation for m in self.labels)


@dataclass(frozen=True)
class AgreementResult:
    """Outcome of exact-set agreement over one pair's records.

    ``labels`` is the winning equivalence class (ties below the pigeonhole
    regime are broken toward the lexicographically smallest relation tuple);
    ``consensus`` exposes it only when ``agr`` reaches the threshold.
    """

    pair_id: str
    agr: int
    n_annotators: int
    labels: frozenset[int]
    threshold: int = 3
    maybe_fraction: float = 0.0

    @property
    def consensus(self):
        return self.labels if self.agr >= self.threshold else None


@dataclass(frozen=True)
class GroundTruth:
    """Consensus relation set for one pair plus its derived domain.

    ``primary`` is the set member with the lowest taxonomy index and feeds
    single-label training; evaluation may accept any member of ``relations``.
    """

    pair_id: str
    relations: frozenset[int]
    primary: int
    domain: int
    cross_domain: bool
    agr: int
    maybe_fraction: float = 0.0


# --------------------------------------------------------------------------
# agreement


def compute_agreement(records, threshold: int = 3):
    """Group one pair's records by exact relation-set equality.

    Returns an AgreementResult, or None when every annotator skipped the
    pair (the pair then counts as "skipped" in the statistics). Records
    must all belong to the same pair.
    """
    records = list(records)
    if not records:
        raise InputError("compute_agreement needs at least one record")
    pair_ids = {r.pair_id for r in records}
    if len(pair_ids) != 1:
        raise InputError(f"records span multiple pairs: {sorted(pair_ids)}")
    if threshold < 1:
        raise InputError("threshold must be >= 1")
    voted = [r for r in records if not r.skipped]
    if not voted:
        return None
    groups = Counter(r.relation_set for r in voted)
    agr = max(groups.values())
    winner = min((s for s, n in groups.items() if n == agr), key=lambda s: tuple(sorted(s)))
    marks = [m for r in voted if r.relation_set == winner for m in r.labels]
    maybe_fraction = sum(m.maybe for m in marks) / len(marks)
    return AgreementResult(
        pair_id=records[0].pair_id,
        agr=agr,
        n_annotators=len(voted),
        labels=winner,
        threshold=threshold,
        maybe_fraction=maybe_fraction,
    )


def agreement_by_pair(records, threshold: int = 3):
    """Agreement for every annotated pair; skipped pairs map to None."""
    grouped = defaultdict(list)
    for r in records:
        grouped[r.pair_id].append(r)
    return {pid: compute_agreement(rs, threshold) for pid, rs in sorted(grouped.items())}


def consistency_filter(results, threshold: int, taxonomy: Taxonomy):
    """Keep pairs with agr >= threshold and build GroundTruth entries.

    A consensus set whose relations straddle domains is flagged
    ``cross_domain``; callers exclude flagged pairs from domain-level
    training unless told otherwise.
    """
    if threshold < 1:
        raise InputError("threshold must be >= 1")
    out = []
    for res in results:
        if res is None or res.agr < threshold:
            continue
        primary = min(res.labels)
        domains = {taxonomy.domain_of(r) for r in res.labels}
        out.append(GroundTruth(
            pair_id=res.pair_id,
            relations=res.labels,
            primary=primary,
            domain=taxonomy.domain_of(primary),
            cross_domain=len(domains) > 1,
            agr=res.agr,
            maybe_fraction=res.maybe_fraction,
        ))
    return out


# --------------------------------------------------------------------------
# statistics


@dataclass
class StatisticsReport:
    """Aggregate annotation statistics.

    Fractions are plain ratios in [0, 1]; ``render`` formats them as
    percentages rounded to one decimal (trailing ".0" dropped).
    """

    n_pairs: int
    n_skipped_pairs: int
    n_records: int
    n_marks: int
    per_record_label_counts: dict      # labels-per-record (1..3) -> record count
    distinct_relation_counts: dict     # distinct relations across annotators -> pair count
    maybe_fraction: float
    agr_histogram: dict                # agr level -> pair count (skipped pairs excluded)
    consistency_counts: dict = field(default_factory=dict)  # level -> {"relations": {...}, "domains": {...}}

    @property
    def n_voted_pairs(self) -> int:
        return self.n_pairs - self.n_skipped_pairs

    def retained_fraction(self, threshold: int) -> float:
        kept = sum(n for a, n in self.agr_histogram.items() if a >= threshold)
        return kept / self.n_pairs if self.n_pairs else 0.0

    def to_json(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "n_skipped_pairs": self.n_skipped_pairs,
            "n_records": self.n_records,
            "n_marks": self.n_marks,
            "per_record_label_counts": {str(k): v for k, v in sorted(self.per_record_label_counts.items())},
            "distinct_relation_counts": {str(k): v for k, v in sorted(self.distinct_relation_counts.items())},
            "maybe_fraction": self.maybe_fraction,
            "agr_histogram": {str(k): v for k, v in sorted(self.agr_histogram.items())},
            "consistency_counts": {
                str(level): counts for level, counts in sorted(self.consistency_counts.items())
            },
        }

    def render(self) -> str:
        lines = [
            f"pairs annotated:      {self.n_pairs} ({self.n_skipped_pairs} skipped by all annotators)",
            f"non-skip records:     {self.n_records}",
            f"label marks:          {self.n_marks} ({_pct(self.maybe_fraction)}% flagged maybe)",
            "labels per record:    " + "  ".join(
                f"{k}: {_pct(v / self.n_records)}%" for k, v in sorted(self.per_record_label_counts.items())
            ),
            "distinct relations per pair: " + "  ".join(
                f"{k}: {_pct(v / self.n_voted_pairs)}%" for k, v in sorted(self.distinct_relation_counts.items())
            ),
            "agreement histogram:  " + "  ".join(
                f"agr={k}: {_pct(v / self.n_pairs)}%" for k, v in sorted(self.agr_histogram.items(), reverse=True)
            ),
        ]
        if self.n_skipped_pairs:
            lines.append(f"                      skipped: {_pct(self.n_skipped_pairs / self.n_pairs)}%")
        for level in sorted(self.consistency_counts):
            rels = self.consistency_counts[level]["relations"]
            doms = self.consistency_counts[level]["domains"]
            total = sum(rels.values())
            lines.append(f"consistency >= {level}: {total} pairs")
            lines.append("  domains:   " + "  ".join(f"{d}: {n}" for d, n in doms.items()))
            lines.append("  relations: " + "  ".join(f"{r}: {n}" for r, n in rels.items()))
        return "\n".join(lines)


def _pct(fraction: float) -> str:
    text = f"{fraction * 100.0:.1f}"
    return text[:-2] if text.endswith(".0") else text


def label_statistics(records, taxonomy: Taxonomy, max_level: int = 5) -> StatisticsReport:
    """Distributional report over raw annotator records.

    Covers labels-per-record counts, across-annotator distinct-relation
    counts, the maybe fraction, the agreement histogram, and per-relation /
    per-domain pair counts at each consistency level (pairs are counted
    once, under the primary relation of their winning label set).
    """
    records = list(records)
    grouped = defaultdict(list)
    for r in records:
        grouped[r.pair_id].append(r)

    per_record = Counter()
    n_marks = 0
    n_maybe = 0
    distinct = Counter()
    agr_hist = Counter()
    n_skipped = 0
    level_rel = {level: Counter() for level in range(1, max_level + 1)}

    for pid in sorted(grouped):
        rs = grouped[pid]
        voted = [r for r in rs if not r.skipped]
        for r in voted:
            per_record[len(r.labels)] += 1
            n_marks += len(r.labels)
            n_maybe += sum(m.maybe for m in r.labels)
        if not voted:
            n_skipped += 1
            continue
        distinct[len(frozenset().union(*(r.relation_set for r in voted)))] += 1
        res = compute_agreement(rs)
        agr_hist[res.agr] += 1
        for level in range(1, min(res.agr, max_level) + 1):
            level_rel[level][min(res.labels)] += 1

    consistency_counts = {}
    for level in range(1, max_level + 1):
        rel_names = {}
        dom_names = Counter()
        for r_idx in sorted(level_rel[level]):
            rel_names[taxonomy.relation_name(r_idx)] = level_rel[level][r_idx]
            dom_names[taxonomy.domain_name(taxonomy.domain_of(r_idx))] += level_rel[level][r_idx]
        consistency_counts[level] = {
            "relations": rel_names,
            "domains": {d: dom_names[d] for d in taxonomy.domains if d in dom_names},
        }

    return StatisticsReport(
        n_pairs=len(grouped),
        n_skipped_pairs=n_skipped,
        n_records=sum(per_record.values()),
        n_marks=n_marks,
        per_record_label_counts=dict(per_record),
        distinct_relation_counts=dict(distinct),
        maybe_fraction=(n_maybe / n_marks) if n_marks else 0.0,
        agr_histogram=dict(agr_hist),
        consistency_counts=consistency_counts,
    )


# --------------------------------------------------------------------------
# file I/O


def _read_tsv(path, expected_header):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(path, 1, "empty file") from None
        if tuple(header) != tuple(expected_header):
            raise IngestError(path, 1, f"expected header {list(expected_header)}, got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            yield line_no, row


def parse_label_field(field_text: str, taxonomy: Taxonomy) -> tuple[LabelMark, ...]:
    """Parse a ``;``-separated label field; empty means skip."""
    field_text = field_text.strip()
    if not field_text:
        return ()
    marks = []
    for entry in field_text.split(";"):
        entry = entry.strip()
        if not entry:
            raise InputError("empty label entry")
        maybe = entry.endswith("?")
        if maybe:
            entry = entry[:-1]
        marks.append(LabelMark(relation=taxonomy.parse_relation(entry), maybe=maybe))
    return tuple(marks)


def load_annotations(path, taxonomy: Taxonomy, known_pairs=None):
    """Load annotator records, failing the whole ingest on the first bad row.

    Unknown relation strings, label-count violations, duplicate relations
    within a record, and (when ``known_pairs`` is given) references to
    unknown pairs all raise IngestError with the offending line number.
    """
    records = []
    seen = set()
    for line_no, row in _read_tsv(path, ANNOTATION_HEADER):
        if len(row) != 3:
            raise IngestError(path, line_no, f"expected 3 columns, got {len(row)}")
        annotator_id, pair_id, labels_text = row
        if not annotator_id or not pair_id:
            raise IngestError(path, line_no, "annotator_id and pair_id must be non-empty")
        if known_pairs is not None and pair_id not in known_pairs:
            raise IngestError(path, line_no, f"unknown pair_id {pair_id!r}")
        key = (annotator_id, pair_id)
        if key in seen:
            raise IngestError(path, line_no, f"duplicate record for {key}")
        seen.add(key)
        try:
            marks = parse_label_field(labels_text, taxonomy)
            records.append(AnnotatorRecord(annotator_id, pair_id, marks))
        except (UnknownRelationError, InputError) as exc:
            raise IngestError(path, line_no, str(exc)) from exc
    return records


def format_label_field(marks, taxonomy: Taxonomy) -> str:
    return ";".join(taxonomy.relation_name(m.relation) + ("?" if m.maybe else "") for m in marks)


def save_annotations(path, records, taxonomy: Taxonomy):
    """Write records in the annotation TSV format (canonical relation names)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(ANNOTATION_HEADER)
        for r in records:
            writer.writerow([r.annotator_id, r.pair_id, format_label_field(r.labels, taxonomy)])


def load_pairs(path):
    """Load person pairs; heads are clamped to the image rectangle."""
    pairs = []
    seen = set()
    for line_no, row in _read_tsv(path, PAIRS_HEADER):
        if len(row) != len(PAIRS_HEADER):
            raise IngestError(path, line_no, f"expected {len(PAIRS_HEADER)} columns, got {len(row)}")
        try:
            pair_id, photo_id = row[0], row[1]
            if pair_id in seen:
                raise InputError(f"duplicate pair_id {pair_id!r}")
            seen.add(pair_id)
            image_w, image_h = float(row[12]), float(row[13])
            if image_w <= 0 or image_h <= 0:
                raise InputError("image dimensions must be positive")
            person_a = Person(row[2], BBox(*map(float, row[3:7])).clamped(image_w, image_h))
            person_b = Person(row[7], BBox(*map(float, row[8:12])).clamped(image_w, image_h))
            pairs.append(PersonPair(pair_id, photo_id, person_a, person_b, image_w, image_h))
        except (InputError, ValueError) as exc:
            raise IngestError(path, line_no, str(exc)) from exc
    return pairs


def save_pairs(path, pairs):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(PAIRS_HEADER)
        for p in pairs:
            a, b = p.person_a, p.person_b
            writer.writerow([
                p.pair_id, p.photo_id,
                a.identity_id, _num(a.head.x), _num(a.head.y), _num(a.head.w), _num(a.head.h),
                b.identity_id, _num(b.head.x), _num(b.head.y), _num(b.head.w), _num(b.head.h),
                _num(p.image_w), _num(p.image_h),
            ])


def _num(value: float) -> str:
    return repr(int(value)) if float(value).is_integer() else repr(float(value))


# --------------------------------------------------------------------------
# ground-truth serialization


def save_groundtruth(path, truths, taxonomy: Taxonomy):
    payload = [
        {
            "pair_id": t.pair_id,
            "relations": sorted(taxonomy.relation_name(r) for r in t.relations),
            "primary": taxonomy.relation_name(t.primary),
            "domain": taxonomy.domain_name(t.domain),
            "cross_domain": t.cross_domain,
            "agr": t.agr,
            "maybe_fraction": t.maybe_fraction,
        }
        for t in truths
    ]
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def load_groundtruth(path, taxonomy: Taxonomy):
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        truths = []
        for entry in payload:
            relations = frozenset(taxonomy.parse_relation(r) for r in entry["relations"])
            truths.append(GroundTruth(
                pair_id=entry["pair_id"],
                relations=relations,
                primary=taxonomy.parse_relation(entry["primary"]),
                domain=taxonomy.parse_domain(entry["domain"]),
                cross_domain=bool(entry["cross_domain"]),
                agr=int(entry["agr"]),
                maybe_fraction=float(entry.get("maybe_fraction", 0.0)),
            ))
        return truths
    except RelscopeError:
        raise
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"bad ground-truth file {path}: {exc}") from exc
