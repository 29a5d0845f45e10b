"""Benchmark pipeline for hierarchical social-relation recognition.

Turns multi-annotator pair labels into consensus ground truth, generates
recognition and leave-one-relation-out splits, fuses semantic-attribute
feature blocks, trains one-vs-rest linear SVMs, and reports accuracy and
per-attribute contribution coordinates.
"""

__version__ = "0.1.0"

from .annotations import (
    AgreementResult,
    AnnotatorRecord,
    BBox,
    GroundTruth,
    LabelMark,
    Person,
    PersonPair,
    compute_agreement,
    consistency_filter,
    label_statistics,
)
from .errors import (
    EvalError,
    IngestError,
    InputError,
    MissingFeatureError,
    RelscopeError,
    ShapeError,
    SpecError,
    SplitError,
    TrainError,
    UnknownRelationError,
)
from .evaluation import ContributionPoint, EvalReport, accuracy_report, contribution_points
from .featstore import (
    AttributeRegistry,
    FeatureStore,
    FusedVector,
    Standardizer,
    default_registry,
    derive_pair_age,
    derive_pair_gender,
    pool_proximity,
)
from .pairgeom import GeomFeature, RegionPair, body_from_head, geom_feature
from .splits import SplitManifest, make_ac_split, make_sr_splits
from .svm import SvmConfig, SvmModel, predict, select_lambda, train
from .synthgen import SynthSpec, generate
from .taxonomy import Taxonomy, default_taxonomy
