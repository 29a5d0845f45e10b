"""Recognition (all-class) and leave-one-relation-out split generation.

All-class (AC) splits keep an externally preserved test list untouched,
then carve a fresh validation set out of the remaining pairs at album
granularity: every pair of the chosen albums goes to validation, so no
album straddles the new train/validation line.

Single-relation (SR) splits hold one relation out for testing and divide
the remaining pairs into identity-balanced folds, one of which becomes
validation. Identities are assigned to folds greedily (largest pair count
first, to the fold with the fewest identities), which keeps the per-fold
distinct-identity counts within one of each other. A pair whose two
identities fall on opposite sides of the train/validation line is
discarded, validation side first. Relations that are their domain's only
member are never held out and are always forced into training.
"""

from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, SplitError
from .taxonomy import Taxonomy

ALBUM_HEADER = ("pair_id", "album_id")


@dataclass(frozen=True)
class SplitManifest:
    """A named train/validation/test partition of pair ids."""

    name: str
    kind: str                      # "AC" | "SR"
    held_out: str | None           # relation name, SR only
    seed: int
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in ("AC", "SR"):
            raise InputError(f"split kind must be AC or SR, got {self.kind!r}")
        train, val, test = set(self.train), set(self.val), set(self.test)
        if train & val or train & test or val & test:
            raise SplitError(f"split {self.name!r}: train/val/test overlap")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "held_out": self.held_out,
            "seed": self.seed,
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "SplitManifest":
        try:
            return cls(
                name=payload["name"],
                kind=payload["kind"],
                held_out=payload["held_out"],
                seed=int(payload["seed"]),
                train=tuple(payload["train"]),
                val=tuple(payload["val"]),
                test=tuple(payload["test"]),
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad split manifest: {exc}") from exc

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SplitManifest":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class SrDiagnostics:
    """Bookkeeping behind one SR manifest, for auditing and tests."""

    held_out: str
    val_fold: int
    identity_folds: dict           # identity -> fold index (foldable identities only)
    discarded: tuple[str, ...]     # pairs dropped by the identity-conflict rule
    forced_train: tuple[str, ...]  # pairs forced into training (always-train relations)


def make_ac_split(groundtruth, album_index, preserved_test, n_val_albums: int = 8, seed: int = 0,
                  name: str = "ac") -> SplitManifest:
    """All-class split: preserved test, album-level validation, rest train."""
    gt_ids = {t.pair_id for t in groundtruth}
    preserved_test = list(preserved_test)
    missing = sorted(set(preserved_test) - gt_ids)
    if missing:
        raise SplitError(f"preserved test pairs missing from ground truth: {missing[:5]}")
    test = set(preserved_test)
    remainder = sorted(gt_ids - test)
    by_album = defaultdict(list)
    for pid in remainder:
        if pid not in album_index:
            raise InputError(f"pair {pid!r} has no album in the album index")
        by_album[album_index[pid]].append(pid)
    albums = sorted(by_album)
    if len(albums) < n_val_albums:
        raise SplitError(f"need at least {n_val_albums} non-test albums, found {len(albums)}")
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(albums, size=n_val_albums, replace=False).tolist())
    val = sorted(pid for a in chosen for pid in by_album[a])
    train = sorted(pid for a in albums if a not in chosen for pid in by_album[a])
    return SplitManifest(
        name=name, kind="AC", held_out=None, seed=seed,
        train=tuple(train), val=tuple(val), test=tuple(sorted(test)),
    )


def always_train_relations(taxonomy: Taxonomy) -> tuple[int, ...]:
    """Relations that are their domain's only member; holding one out would
    leave its domain without any training data."""
    return tuple(
        r for d in range(taxonomy.n_domains)
        for r in taxonomy.relations_of(d)
        if len(taxonomy.relations_of(d)) == 1
    )


def _assign_identity_folds(pair_counts: Counter, n_folds: int) -> dict:
    """Greedy balance of distinct-identity counts: biggest identities first,
    each to the currently lightest fold (ties by fold index)."""
    fold_sizes = [0] * n_folds
    folds = {}
    for identity in sorted(pair_counts, key=lambda i: (-pair_counts[i], i)):
        fold = min(range(n_folds), key=lambda f: (fold_sizes[f], f))
        folds[identity] = fold
        fold_sizes[fold] += 1
    return folds


def make_sr_splits(groundtruth, pairs_by_id, taxonomy: Taxonomy, n_folds: int = 10, seed: int = 0):
    """One leave-one-relation-out manifest per holdable relation.

    ``pairs_by_id`` maps pair_id to PersonPair (identities drive the
    folds). Returns a list of (SplitManifest, SrDiagnostics), ordered by
    held-out relation index; manifest k uses derived seed ``seed + k``.
    """
    truths = list(groundtruth)
    covered = Counter()
    for t in truths:
        for r in t.relations:
            covered[r] += 1
    for r in range(taxonomy.n_relations):
        if covered[r] == 0:
            raise SplitError(f"relation {taxonomy.relation_name(r)!r} has zero pairs")
    for t in truths:
        if t.pair_id not in pairs_by_id:
            raise InputError(f"pair {t.pair_id!r} missing from the pairs table")

    forced_set = set(always_train_relations(taxonomy))
    holdable = [r for r in range(taxonomy.n_relations) if r not in forced_set]
    results = []
    for k, held in enumerate(holdable):
        rng = np.random.default_rng(seed + k)
        test, forced, foldable = [], [], []
        for t in truths:
            if held in t.relations:
                test.append(t.pair_id)
            elif t.relations & forced_set:
                forced.append(t.pair_id)
            else:
                foldable.append(t.pair_id)

        pair_counts = Counter()
        for pid in foldable:
            for identity in pairs_by_id[pid].identities:
                pair_counts[identity] += 1
        folds = _assign_identity_folds(pair_counts, n_folds)
        val_fold = int(rng.integers(n_folds))

        val, train, discarded = [], list(forced), []
        for pid in foldable:
            id_a, id_b = pairs_by_id[pid].identities
            in_val = (folds[id_a] == val_fold, folds[id_b] == val_fold)
            if all(in_val):
                val.append(pid)
            elif not any(in_val):
                train.append(pid)
            else:
                discarded.append(pid)  # identities straddle the line

        # Forced-train pairs may plant a validation-fold identity in train;
        # the conflicting validation pairs are the ones dropped.
        train_identities = {i for pid in train for i in pairs_by_id[pid].identities}
        kept_val = []
        for pid in sorted(val):
            if train_identities & set(pairs_by_id[pid].identities):
                discarded.append(pid)
            else:
                kept_val.append(pid)

        manifest = SplitManifest(
            name=f"sr-{taxonomy.relation_name(held).replace('/', '-').replace(' ', '_')}",
            kind="SR",
            held_out=taxonomy.relation_name(held),
            seed=seed + k,
            train=tuple(sorted(train)),
            val=tuple(kept_val),
            test=tuple(sorted(test)),
        )
        diagnostics = SrDiagnostics(
            held_out=taxonomy.relation_name(held),
            val_fold=val_fold,
            identity_folds=folds,
            discarded=tuple(sorted(discarded)),
            forced_train=tuple(sorted(forced)),
        )
        results.append((manifest, diagnostics))
    return results


# --------------------------------------------------------------------------
# auxiliary file formats


def load_album_index(path) -> dict:
    """TSV ``pair_id album_id`` -> dict."""
    path = Path(path)
    index = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None or tuple(header) != ALBUM_HEADER:
            raise InputError(f"{path}: expected header {list(ALBUM_HEADER)}")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise InputError(f"{path}: malformed album row {row}")
            index[row[0]] = row[1]
    return index


def save_album_index(path, index: dict) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(ALBUM_HEADER)
        for pid in sorted(index):
            writer.writerow([pid, index[pid]])


def load_pair_list(path) -> list[str]:
    """Plain text file, one pair id per line."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [line.strip() for line in lines if line.strip()]


def save_pair_list(path, pair_ids) -> None:
    Path(path).write_text("".join(f"{pid}\n" for pid in pair_ids), encoding="utf-8")
