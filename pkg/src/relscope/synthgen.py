"""Synthetic corpora with known latent structure for desk-scale testing.

Every generated pair has a true relation. Annotators report it with
probability 1 - noise; otherwise they pick a wrong relation (or skip), so
the empirical agreement distribution degrades smoothly as noise grows.

Class structure in feature space comes from per-relation Gaussian
prototypes with shared unit covariance: relations of the same domain sit
around a common domain center, closer to each other than to other
domains, and the minimum inter-prototype distance is the requested margin
(in sigma units). Large margins therefore make the fused features linearly
separable by construction, with domain recognition easier than relation
recognition.

Age, gender, and location blocks are built through the real preprocessing
path (distribution-derived pair attributes, box geometry), and the
interaction maps are written as raw tensor files and reduced with the real
pooling operator, so a full pipeline run exercises every ingest format.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import pairgeom
from .annotations import AnnotatorRecord, BBox, LabelMark, Person, PersonPair, save_annotations, save_pairs
from .errors import SpecError
from .featstore import (
    AttributeKind,
    AttributeRegistry,
    KIND_NAMES,
    derive_pair_age,
    derive_pair_gender,
    pool_proximity,
    save_feature_tsv,
    write_proximity_tensor,
)
from .splits import save_album_index, save_pair_list
from .taxonomy import Taxonomy, default_taxonomy

SYNTHETIC_DIMS = {
    "head_age": 15,
    "head_gender": 6,
    "head_loc_scale": 14,
    "head_appearance": 8,
    "head_pose": 5,
    "face_emotion": 7,
    "body_age": 15,
    "body_gender": 6,
    "body_loc_scale": 14,
    "clothing": 8,
    "proximity": 16,
    "activity": 16,
}
SYNTHETIC_TENSOR_SHAPE = (6, 4, 4)

# Kinds carrying the Gaussian prototype signal (the others are derived from
# sampled boxes and class distributions).
GAUSSIAN_KINDS = ("head_appearance", "head_pose", "face_emotion", "clothing", "activity")

# Typical (left role, right role) age classes per relation; indices into
# featstore.AGE_CLASSES. "x" gender means either.
_AGE_ROLE = {
    "father-child": (3, 1), "mother-child": (3, 1),
    "grandpa-grandchild": (4, 1), "grandma-grandchild": (4, 1),
    "friends": (2, 2), "siblings": (2, 2), "classmates": (2, 2),
    "lovers/spouses": (2, 2),
    "presenter-audience": (3, 3), "teacher-student": (3, 2),
    "trainer-trainee": (3, 2), "leader-subordinate": (3, 3),
    "band members": (2, 2), "dance team members": (2, 2),
    "sport team members": (2, 2), "colleagues": (3, 3),
}
_GENDER_ROLE = {
    "father-child": (0, None), "mother-child": (1, None),
    "grandpa-grandchild": (0, None), "grandma-grandchild": (1, None),
    "lovers/spouses": "opposite",
}


@dataclass(frozen=True)
class SynthSpec:
    """Knobs for one synthetic corpus."""

    n_pairs: int = 800
    n_identities: int = 160
    n_photos: int = 400
    n_albums: int = 30
    n_annotators: int = 5
    noise: float = 0.1            # per-annotator deviation probability
    margin: float = 10.0          # min inter-prototype distance, sigma units
    proportions: tuple | None = None  # per-relation pair shares, default uniform
    seed: int = 0
    image_w: int = 800
    image_h: int = 600
    test_album_fraction: float = 0.2
    skip_share: float = 0.25      # share of deviations that skip instead of mislabel
    maybe_rate: float = 0.08

    def __post_init__(self):
        if not 0.0 <= self.noise < 1.0:
            raise SpecError(f"noise must be in [0, 1), got {self.noise}")
        if self.margin <= 0:
            raise SpecError("margin must be positive")
        if min(self.n_pairs, self.n_identities, self.n_photos, self.n_albums, self.n_annotators) < 1:
            raise SpecError("corpus sizes must be positive")
        if self.n_identities < 2:
            raise SpecError("need at least two identities")


def synthetic_registry() -> AttributeRegistry:
    kinds = [AttributeKind(name, SYNTHETIC_DIMS[name], source="synthetic") for name in KIND_NAMES]
    return AttributeRegistry(kinds, SYNTHETIC_TENSOR_SHAPE)


def relation_counts(spec: SynthSpec, taxonomy: Taxonomy) -> list[int]:
    """Largest-remainder allocation of pairs to relations; every relation
    must end up with at least one pair."""
    k = taxonomy.n_relations
    props = spec.proportions
    if props is None:
        props = [1.0 / k] * k
    props = [float(p) for p in props]
    if len(props) != k:
        raise SpecError(f"need {k} proportions, got {len(props)}")
    if any(p < 0 for p in props) or abs(sum(props) - 1.0) > 1e-9:
        raise SpecError("proportions must be non-negative and sum to 1")
    raw = [p * spec.n_pairs for p in props]
    counts = [int(v) for v in raw]
    remainders = sorted(range(k), key=lambda i: (raw[i] - counts[i], -i), reverse=True)
    for i in remainders[: spec.n_pairs - sum(counts)]:
        counts[i] += 1
    if any(c < 1 for c in counts):
        bad = taxonomy.relation_name(counts.index(0))
        raise SpecError(f"proportions leave relation {bad!r} without pairs; add pairs or rebalance")
    return counts


def _prototypes(spec: SynthSpec, taxonomy: Taxonomy) -> np.ndarray:
    """Per-relation prototype vectors over the Gaussian signal coordinates."""
    signal_dim = sum(SYNTHETIC_DIMS[k] for k in GAUSSIAN_KINDS)
    delta = spec.margin
    offset = delta / np.sqrt(2.0)           # same-domain pairs sit delta apart
    center_amp = 1.5 * delta                # cross-domain pairs strictly farther
    protos = np.zeros((taxonomy.n_relations, signal_dim))
    for d in range(taxonomy.n_domains):
        for pos, r in enumerate(taxonomy.relations_of(d)):
            protos[r, d] = center_amp
            protos[r, taxonomy.n_domains + pos] = offset
    return protos


def _age_distribution(rng, top_class: int) -> np.ndarray:
    noise = rng.dirichlet(np.ones(6))
    dist = 0.15 * noise
    dist[top_class] += 0.85
    return dist


def _gender_distribution(rng, top_class: int) -> np.ndarray:
    noise = rng.dirichlet(np.ones(2))
    dist = 0.15 * noise
    dist[top_class] += 0.85
    return dist


def _annotator_labels(rng, true_rel: int, n_relations: int, spec: SynthSpec):
    """One annotator's vote: the truth, a wrong relation, or a skip."""
    if rng.random() >= spec.noise:
        rel = true_rel
    elif rng.random() < spec.skip_share:
        return ()
    else:
        rel = int(rng.integers(n_relations - 1))
        if rel >= true_rel:
            rel += 1
    return (LabelMark(rel, maybe=bool(rng.random() < spec.maybe_rate)),)


def generate(spec: SynthSpec, out_dir, taxonomy: Taxonomy | None = None, write_features: bool = True) -> dict:
    """Write a full corpus under ``out_dir``; returns the artifact paths.

    Identical specs produce byte-identical trees. With ``write_features``
    off only the pairs/annotations/albums/test-list files are written
    (enough for agreement and split work).
    """
    taxonomy = taxonomy or default_taxonomy()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    counts = relation_counts(spec, taxonomy)
    relations = [r for r, c in enumerate(counts) for _ in range(c)]
    rng.shuffle(relations)

    albums = {f"ph{i:04d}": f"al{i % spec.n_albums:03d}" for i in range(spec.n_photos)}
    n_test_albums = max(1, int(round(spec.test_album_fraction * spec.n_albums)))
    test_albums = {f"al{i:03d}" for i in range(spec.n_albums - n_test_albums, spec.n_albums)}

    pairs, records, album_index = [], [], {}
    for idx, rel in enumerate(relations):
        pair_id = f"p{idx:05d}"
        photo_id = f"ph{int(rng.integers(spec.n_photos)):04d}"
        ia, ib = rng.choice(spec.n_identities, size=2, replace=False)
        heads = []
        for _ in range(2):
            w = float(rng.integers(24, 61))
            h = float(rng.integers(24, 61))
            x = float(rng.integers(0, spec.image_w - int(w)))
            y = float(rng.integers(0, spec.image_h - int(h)))
            heads.append(BBox(x, y, w, h))
        pair = PersonPair(
            pair_id=pair_id,
            photo_id=photo_id,
            person_a=Person(f"id{ia:04d}", heads[0]),
            person_b=Person(f"id{ib:04d}", heads[1]),
            image_w=spec.image_w,
            image_h=spec.image_h,
        )
        pairs.append(pair)
        album_index[pair_id] = albums[photo_id]
        for a in range(spec.n_annotators):
            records.append(AnnotatorRecord(
                annotator_id=f"a{a}",
                pair_id=pair_id,
                labels=_annotator_labels(rng, rel, taxonomy.n_relations, spec),
            ))

    paths = {
        "pairs": out_dir / "pairs.tsv",
        "annotations": out_dir / "annotations.tsv",
        "albums": out_dir / "albums.tsv",
        "preserved_test": out_dir / "preserved_test.txt",
        "truth": out_dir / "truth.json",
    }
    save_pairs(paths["pairs"], pairs)
    save_annotations(paths["annotations"], records, taxonomy)
    save_album_index(paths["albums"], album_index)
    preserved = [p.pair_id for p in pairs if album_index[p.pair_id] in test_albums]
    save_pair_list(paths["preserved_test"], preserved)

    if write_features:
        registry = synthetic_registry()
        feature_dir = out_dir / "features"
        tensor_dir = out_dir / "tensors"
        feature_dir.mkdir(exist_ok=True)
        tensor_dir.mkdir(exist_ok=True)
        blocks = {name: [] for name in KIND_NAMES}
        protos = _prototypes(spec, taxonomy)
        signal_split = np.cumsum([SYNTHETIC_DIMS[k] for k in GAUSSIAN_KINDS])[:-1]

        for pair, rel in zip(pairs, relations):
            rel_name = taxonomy.relation_name(rel)
            signal = protos[rel] + rng.standard_normal(protos.shape[1])
            for kind, part in zip(GAUSSIAN_KINDS, np.split(signal, signal_split)):
                blocks[kind].append((pair.pair_id, part))

            blocks["head_loc_scale"].append((pair.pair_id, pairgeom.loc_scale_vector(pair, "head")))
            blocks["body_loc_scale"].append((pair.pair_id, pairgeom.loc_scale_vector(pair, "body")))

            role_ages = _AGE_ROLE[rel_name]
            gender_rule = _GENDER_ROLE.get(rel_name)
            if gender_rule == "opposite":
                first = int(rng.integers(2))
                role_genders = (first, 1 - first)
            elif gender_rule is None:
                role_genders = (int(rng.integers(2)), int(rng.integers(2)))
            else:
                role_genders = tuple(g if g is not None else int(rng.integers(2)) for g in gender_rule)
            # roles land on persons at random; blocks follow pair orientation
            flip = bool(rng.integers(2))
            by_person = {
                pair.person_a.identity_id: (role_ages[flip], role_genders[flip]),
                pair.person_b.identity_id: (role_ages[1 - flip], role_genders[1 - flip]),
            }
            left, right = pairgeom.oriented_persons(pair)
            age_l, gender_l = by_person[left.identity_id]
            age_r, gender_r = by_person[right.identity_id]
            blocks["head_age"].append((pair.pair_id, derive_pair_age(
                _age_distribution(rng, age_l), _age_distribution(rng, age_r))))
            blocks["body_age"].append((pair.pair_id, derive_pair_age(
                _age_distribution(rng, age_l), _age_distribution(rng, age_r))))
            blocks["head_gender"].append((pair.pair_id, derive_pair_gender(
                _gender_distribution(rng, gender_l), _gender_distribution(rng, gender_r))))
            blocks["body_gender"].append((pair.pair_id, derive_pair_gender(
                _gender_distribution(rng, gender_l), _gender_distribution(rng, gender_r))))

            c, h, w = SYNTHETIC_TENSOR_SHAPE
            tensor = 0.3 * rng.standard_normal((c, h, w))
            cell = rel % (h * w)
            tensor[rel % c, cell // w, cell % w] += 2.5
            tensor32 = tensor.astype(np.float32)
            write_proximity_tensor(tensor_dir / f"{pair.pair_id}.prx", tensor32)
            blocks["proximity"].append((pair.pair_id, pool_proximity(
                tensor32.astype(np.float64), SYNTHETIC_TENSOR_SHAPE)))

        for kind in KIND_NAMES:
            save_feature_tsv(feature_dir / f"{kind}.tsv", kind, blocks[kind], registry)
        registry.save(feature_dir / "manifest.json")
        paths["features"] = feature_dir
        paths["tensors"] = tensor_dir
        paths["manifest"] = feature_dir / "manifest.json"

    truth = {
        "spec": asdict(spec),
        "relations": {p.pair_id: taxonomy.relation_name(r) for p, r in zip(pairs, relations)},
        "albums": album_index,
        "test_albums": sorted(test_albums),
        "preserved_test": preserved,
    }
    paths["truth"].write_text(json.dumps(truth, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}
