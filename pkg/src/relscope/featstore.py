"""Attribute registry, feature files, preprocessing, and late fusion.

Twelve semantic attribute categories feed the classifier. Each category is
one fixed-dimension vector per pair, stored as a TSV file (header
``pair_id v0 ... v{dim-1}``, floats at full round-trip precision). A JSON
manifest records the category dimensions and sources; synthetic corpora
shrink the large categories and say so in the manifest.

Preprocessing covers the two derived inputs:

* interaction-map tensors (binary ``PRX1`` files: magic, three uint32
  little-endian dims, then C*H*W float32 little-endian values) are reduced
  along the channel axis by max pooling and flattened row-major;
* per-person age and gender class distributions are concatenated and
  augmented with pair-difference categories (age gap small/middle/large,
  gender same/diff).

Fusion concatenates standardized blocks in fixed registry order. Per-kind
z-score statistics come from the training split only; constant dimensions
pass through unscaled. Missing blocks are an error, never zero-filled.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestError, InputError, MissingFeatureError, ShapeError

KIND_NAMES = (
    "head_age", "head_gender", "head_loc_scale", "head_appearance",
    "head_pose", "face_emotion", "body_age", "body_gender",
    "body_loc_scale", "clothing", "proximity", "activity",
)

DEFAULT_DIMS = {
    "head_age": 15,
    "head_gender": 6,
    "head_loc_scale": 14,
    "head_appearance": 40,
    "head_pose": 5,
    "face_emotion": 7,
    "body_age": 15,
    "body_gender": 6,
    "body_loc_scale": 14,
    "clothing": 8,
    "proximity": 2500,
    "activity": 1024,
}

PROXIMITY_TENSOR_SHAPE = (338, 50, 50)
PROXIMITY_MAGIC = b"PRX1"

AGE_CLASSES = ("infant", "child", "young", "middleAge", "senior", "unknown")
AGE_UNKNOWN = AGE_CLASSES.index("unknown")
GENDER_CLASSES = ("male", "female")


@dataclass(frozen=True)
class AttributeKind:
    name: str
    dim: int
    source: str = "external"

    def __post_init__(self):
        if self.dim <= 0:
            raise InputError(f"kind {self.name!r}: dim must be positive")


class AttributeRegistry:
    """The fixed, ordered set of twelve attribute kinds and their dims."""

    def __init__(self, kinds, proximity_tensor_shape=PROXIMITY_TENSOR_SHAPE):
        kinds = tuple(kinds)
        names = tuple(k.name for k in kinds)
        if names != KIND_NAMES:
            raise InputError(
                f"registry must define exactly the kinds {list(KIND_NAMES)} in order, got {list(names)}"
            )
        self.kinds = kinds
        self._by_name = {k.name: k for k in kinds}
        self.proximity_tensor_shape = tuple(int(v) for v in proximity_tensor_shape)
        if len(self.proximity_tensor_shape) != 3:
            raise InputError("proximity tensor shape must have 3 dims")
        c, h, w = self.proximity_tensor_shape
        if h * w != self._by_name["proximity"].dim:
            raise InputError(
                f"proximity dim {self._by_name['proximity'].dim} != H*W of tensor shape {self.proximity_tensor_shape}"
            )

    def __iter__(self):
        return iter(self.kinds)

    def __contains__(self, name):
        return name in self._by_name

    def kind(self, name: str) -> AttributeKind:
        if name not in self._by_name:
            raise InputError(f"unknown attribute kind {name!r}")
        return self._by_name[name]

    def dim_of(self, name: str) -> int:
        return self.kind(name).dim

    def ordered(self, names=None) -> tuple[str, ...]:
        """Registry-order tuple of the requested kind names (default: all)."""
        if names is None:
            return tuple(k.name for k in self.kinds)
        wanted = set(names)
        for n in wanted:
            self.kind(n)
        return tuple(k.name for k in self.kinds if k.name in wanted)

    def total_dim(self, names=None) -> int:
        return sum(self.dim_of(n) for n in self.ordered(names))

    def offsets(self, names=None) -> dict:
        """Start offset of each kind inside fused vectors over ``names``."""
        out, pos = {}, 0
        for n in self.ordered(names):
            out[n] = pos
            pos += self.dim_of(n)
        return out

    def to_manifest(self) -> dict:
        return {
            "kinds": [{"name": k.name, "dim": k.dim, "source": k.source} for k in self.kinds],
            "proximity_tensor_shape": list(self.proximity_tensor_shape),
        }

    @classmethod
    def from_manifest(cls, manifest: dict) -> "AttributeRegistry":
        try:
            kinds = [AttributeKind(e["name"], int(e["dim"]), e.get("source", "external"))
                     for e in manifest["kinds"]]
            shape = manifest.get("proximity_tensor_shape", PROXIMITY_TENSOR_SHAPE)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad feature manifest: {exc}") from exc
        return cls(kinds, shape)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_manifest(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "AttributeRegistry":
        return cls.from_manifest(json.loads(Path(path).read_text(encoding="utf-8")))


def default_registry() -> AttributeRegistry:
    return AttributeRegistry(AttributeKind(n, DEFAULT_DIMS[n]) for n in KIND_NAMES)


# --------------------------------------------------------------------------
# preprocessing


def pool_proximity(tensor, expected_shape=PROXIMITY_TENSOR_SHAPE) -> np.ndarray:
    """Channel-axis max pooling followed by a row-major flatten.

    ``out[i*W + j] = max_c tensor[c, i, j]``. The tensor must match
    ``expected_shape`` exactly; pass a different shape (or None to skip the
    check) for reduced-scale inputs.
    """
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.ndim != 3:
        raise ShapeError(expected_shape or ("C", "H", "W"), tensor.shape, "proximity tensor")
    if expected_shape is not None and tensor.shape != tuple(expected_shape):
        raise ShapeError(expected_shape, tensor.shape, "proximity tensor")
    return tensor.max(axis=0).reshape(-1)


def write_proximity_tensor(path, tensor) -> None:
    tensor = np.asarray(tensor, dtype=np.float32)
    if tensor.ndim != 3:
        raise ShapeError(("C", "H", "W"), tensor.shape, "proximity tensor")
    with Path(path).open("wb") as fh:
        fh.write(PROXIMITY_MAGIC)
        fh.write(struct.pack("<III", *tensor.shape))
        fh.write(tensor.astype("<f4").tobytes(order="C"))


def read_proximity_tensor(path) -> np.ndarray:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != PROXIMITY_MAGIC:
        raise InputError(f"{path}: not a proximity tensor file (bad magic {blob[:4]!r})")
    if len(blob) < 16:
        raise InputError(f"{path}: truncated header")
    c, h, w = struct.unpack("<III", blob[4:16])
    expected = 16 + 4 * c * h * w
    if len(blob) != expected:
        raise InputError(f"{path}: expected {expected} bytes for shape ({c},{h},{w}), got {len(blob)}")
    data = np.frombuffer(blob, dtype="<f4", offset=16)
    return data.reshape(c, h, w).astype(np.float64)


def _check_distribution(dist, n_classes, what):
    dist = np.asarray(dist, dtype=np.float64)
    if dist.shape != (n_classes,):
        raise InputError(f"{what}: expected {n_classes} classes, got shape {dist.shape}")
    if not np.all(np.isfinite(dist)) or np.any(dist < 0):
        raise InputError(f"{what}: entries must be finite and non-negative")
    if abs(dist.sum() - 1.0) > 1e-6:
        raise InputError(f"{what}: probabilities sum to {dist.sum()!r}, expected 1")
    return dist


def derive_pair_age(age_a, age_b) -> np.ndarray:
    """Concatenate two age distributions and append the age-gap category.

    The gap is the ordinal index difference of the argmax classes
    (infant < child < young < middleAge < senior): 0-1 small, 2 middle,
    >=3 large. If either argmax is "unknown" no gap slot is set.
    """
    age_a = _check_distribution(age_a, len(AGE_CLASSES), "age distribution a")
    age_b = _check_distribution(age_b, len(AGE_CLASSES), "age distribution b")
    diff = np.zeros(3, dtype=np.float64)
    top_a, top_b = int(np.argmax(age_a)), int(np.argmax(age_b))
    if top_a != AGE_UNKNOWN and top_b != AGE_UNKNOWN:
        gap = abs(top_a - top_b)
        diff[0 if gap <= 1 else (1 if gap == 2 else 2)] = 1.0
    return np.concatenate([age_a, age_b, diff])


def derive_pair_gender(gender_a, gender_b) -> np.ndarray:
    """Concatenate two gender distributions and append same/diff flags."""
    gender_a = _check_distribution(gender_a, len(GENDER_CLASSES), "gender distribution a")
    gender_b = _check_distribution(gender_b, len(GENDER_CLASSES), "gender distribution b")
    same = int(np.argmax(gender_a)) == int(np.argmax(gender_b))
    flags = np.array([1.0, 0.0] if same else [0.0, 1.0])
    return np.concatenate([gender_a, gender_b, flags])


# --------------------------------------------------------------------------
# blocks, fusion, standardization


@dataclass(frozen=True)
class FeatureBlock:
    pair_id: str
    kind: str
    values: np.ndarray


@dataclass(frozen=True)
class FusedVector:
    pair_id: str
    kinds: tuple[str, ...]
    values: np.ndarray

    @property
    def total_dim(self) -> int:
        return int(self.values.shape[0])


class Standardizer:
    """Per-kind, per-dimension z-score statistics fitted on a training split.

    Dimensions whose training variance is (numerically) zero are passed
    through unscaled.
    """

    def __init__(self, stats):
        # stats: kind -> (mean array, std array with 0 marking constant dims)
        self.stats = {k: (np.asarray(m, float), np.asarray(s, float)) for k, (m, s) in stats.items()}

    def apply(self, kind: str, values: np.ndarray) -> np.ndarray:
        if kind not in self.stats:
            raise InputError(f"standardizer has no statistics for kind {kind!r}")
        mean, std = self.stats[kind]
        scaled = values.astype(np.float64, copy=True)
        active = std > 0
        scaled[active] = (scaled[active] - mean[active]) / std[active]
        return scaled

    def to_json(self) -> dict:
        return {
            k: {"mean": [float(v) for v in m], "std": [float(v) for v in s]}
            for k, (m, s) in sorted(self.stats.items())
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Standardizer":
        return cls({k: (e["mean"], e["std"]) for k, e in payload.items()})

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Standardizer":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


class FeatureStore:
    """In-memory feature blocks keyed by kind and pair, fused on demand."""

    def __init__(self, registry: AttributeRegistry):
        self.registry = registry
        self._blocks: dict[str, dict[str, np.ndarray]] = {}

    def add(self, kind: str, pair_id: str, values) -> None:
        dim = self.registry.dim_of(kind)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (dim,):
            raise ShapeError((dim,), values.shape, f"feature block {kind!r}")
        if not np.all(np.isfinite(values)):
            raise InputError(f"non-finite values in block {kind!r} for pair {pair_id!r}")
        self._blocks.setdefault(kind, {})[pair_id] = values

    def has(self, kind: str, pair_id: str) -> bool:
        return pair_id in self._blocks.get(kind, {})

    def block(self, kind: str, pair_id: str) -> np.ndarray:
        self.registry.kind(kind)
        try:
            return self._blocks[kind][pair_id]
        except KeyError:
            raise MissingFeatureError(pair_id, kind) from None

    def pair_ids(self, kind: str):
        return sorted(self._blocks.get(kind, {}))

    def load_tsv(self, path, kind: str) -> int:
        """Read one kind's feature file; returns the number of rows."""
        dim = self.registry.dim_of(kind)
        expected_header = ["pair_id"] + [f"v{i}" for i in range(dim)]
        path = Path(path)
        count = 0
        with path.open(encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header != expected_header:
                raise IngestError(path, 1, f"bad header for kind {kind!r} (dim {dim})")
            for line_no, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != dim + 1:
                    raise IngestError(path, line_no, f"expected {dim + 1} columns, got {len(parts)}")
                pair_id = parts[0]
                if self.has(kind, pair_id):
                    raise IngestError(path, line_no, f"duplicate pair_id {pair_id!r}")
                try:
                    values = np.array([float(v) for v in parts[1:]], dtype=np.float64)
                    self.add(kind, pair_id, values)
                except (ValueError, InputError, ShapeError) as exc:
                    raise IngestError(path, line_no, str(exc)) from exc
                count += 1
        return count

    def fit_standardizer(self, train_ids, kinds=None) -> Standardizer:
        """Population-moment z-score statistics over the training pairs."""
        train_ids = list(train_ids)
        if not train_ids:
            raise InputError("cannot fit a standardizer on an empty training split")
        stats = {}
        for kind in self.registry.ordered(kinds):
            matrix = np.stack([self.block(kind, pid) for pid in train_ids])
            mean = matrix.mean(axis=0)
            std = matrix.std(axis=0)
            std[std < 1e-12] = 0.0  # constant dims pass through unscaled
            stats[kind] = (mean, std)
        return Standardizer(stats)

    def fuse(self, pair_id: str, kinds=None, standardizer: Standardizer | None = None) -> FusedVector:
        """Concatenate the pair's blocks in registry order.

        Every requested block must exist; a missing one raises
        MissingFeatureError naming the pair and kind.
        """
        ordered = self.registry.ordered(kinds)
        if not ordered:
            raise InputError("fuse needs at least one kind")
        parts = []
        for kind in ordered:
            values = self.block(kind, pair_id)
            if standardizer is not None:
                values = standardizer.apply(kind, values)
            parts.append(values)
        return FusedVector(pair_id=pair_id, kinds=ordered, values=np.concatenate(parts))

    def fuse_matrix(self, pair_ids, kinds=None, standardizer: Standardizer | None = None) -> np.ndarray:
        rows = [self.fuse(pid, kinds, standardizer).values for pid in pair_ids]
        return np.stack(rows) if rows else np.empty((0, self.registry.total_dim(kinds)))


# --------------------------------------------------------------------------
# feature-file writing


def save_feature_tsv(path, kind: str, rows, registry: AttributeRegistry) -> None:
    """Write ``rows`` (iterable of (pair_id, vector)) as one kind's TSV."""
    dim = registry.dim_of(kind)
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("\t".join(["pair_id"] + [f"v{i}" for i in range(dim)]) + "\n")
        for pair_id, values in rows:
            values = np.asarray(values, dtype=np.float64)
            if values.shape != (dim,):
                raise ShapeError((dim,), values.shape, f"feature row for {pair_id!r}")
            fh.write(pair_id + "\t" + "\t".join(repr(float(v)) for v in values) + "\n")
