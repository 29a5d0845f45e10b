"""Accuracy reports, leave-one-relation-out pooling, attribute contributions.

Ground truth may carry more than one relation per pair. In the default
"any-of-set" mode a prediction is correct when it belongs to the consensus
set; in "strict" mode it must equal the primary relation. Correct
predictions land on the confusion diagonal under their predicted class, so
the trace recount always reproduces the accuracy exactly.

Domain-level evaluation works on domain indices; predictions made at
relation level can be coarsened through the taxonomy first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EvalError, InputError
from .taxonomy import Taxonomy

MODES = ("strict", "any-of-set")


@dataclass
class EvalReport:
    task: str                      # "relation" | "domain" | "generalization"
    mode: str
    accuracy: float
    per_class_accuracy: dict       # class name -> accuracy over that row
    confusion: np.ndarray          # rows: credited true class, cols: predicted
    class_names: tuple
    n_test: int
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "mode": self.mode,
            "accuracy": self.accuracy,
            "per_class_accuracy": self.per_class_accuracy,
            "confusion": self.confusion.astype(int).tolist(),
            "class_names": list(self.class_names),
            "n_test": self.n_test,
            "extras": self.extras,
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")

    def render(self) -> str:
        width = max((len(n) for n in self.class_names), default=8)
        lines = [
            f"task: {self.task}   mode: {self.mode}   test pairs: {self.n_test}",
            f"accuracy: {self.accuracy:.4f}",
            "per-class accuracy:",
        ]
        for name in self.class_names:
            if name in self.per_class_accuracy:
                lines.append(f"  {name:<{width}}  {self.per_class_accuracy[name]:.4f}")
        for key, value in self.extras.items():
            if isinstance(value, float):
                lines.append(f"{key}: {value:.4f}")
        return "\n".join(lines)


def _class_space(task: str, taxonomy: Taxonomy):
    if task == "relation":
        return tuple(taxonomy.relations)
    if task in ("domain", "generalization"):
        return tuple(taxonomy.domains)
    raise InputError(f"unknown task {task!r}")


def _truth_sets(truth, task: str, taxonomy: Taxonomy):
    if task == "relation":
        return truth.relations, truth.primary
    return frozenset(taxonomy.domain_of(r) for r in truth.relations), taxonomy.domain_of(truth.primary)


def accuracy_report(predictions, truths, taxonomy: Taxonomy, task: str = "relation",
                    mode: str = "any-of-set") -> EvalReport:
    """Score predictions (pair_id -> class index) against ground truth.

    Every ground-truth pair must have a prediction. Wrong predictions are
    charged to the primary class row; correct ones to the predicted class,
    keeping accuracy equal to the confusion trace over the test count.
    """
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")
    names = _class_space(task, taxonomy)
    k = len(names)
    confusion = np.zeros((k, k), dtype=np.int64)
    truths = list(truths)
    if not truths:
        raise EvalError("no ground truth to evaluate against")
    for truth in truths:
        if truth.pair_id not in predictions:
            raise EvalError(f"missing prediction for pair {truth.pair_id!r}")
        pred = int(predictions[truth.pair_id])
        if not 0 <= pred < k:
            raise EvalError(f"prediction {pred} out of range for task {task!r}")
        accepted, primary = _truth_sets(truth, task, taxonomy)
        correct = pred == primary if mode == "strict" else pred in accepted
        confusion[pred if correct else primary, pred] += 1
    n = len(truths)
    per_class = {}
    for idx, name in enumerate(names):
        row = confusion[idx].sum()
        if row:
            per_class[name] = float(confusion[idx, idx] / row)
    return EvalReport(
        task=task,
        mode=mode,
        accuracy=float(np.trace(confusion) / n),
        per_class_accuracy=per_class,
        confusion=confusion,
        class_names=names,
        n_test=n,
    )


def coarsen_predictions(relation_predictions, taxonomy: Taxonomy) -> dict:
    """Map relation-level predictions to domain indices."""
    return {pid: taxonomy.domain_of(int(r)) for pid, r in relation_predictions.items()}


def generalization_report(runs, truths_by_id, taxonomy: Taxonomy, mode: str = "any-of-set") -> EvalReport:
    """Pool held-out-relation test pairs over all leave-one-out runs.

    ``runs`` is an iterable of (SplitManifest, predictions) where the
    predictions map the manifest's test pairs to domain indices. The
    headline accuracy is the micro average over pooled pairs; per-held-out
    accuracies and their macro average ride along in ``extras``.
    """
    names = tuple(taxonomy.domains)
    k = len(names)
    confusion = np.zeros((k, k), dtype=np.int64)
    per_relation = {}
    total = correct_total = 0
    for manifest, predictions in runs:
        if manifest.kind != "SR" or manifest.held_out is None:
            raise EvalError(f"manifest {manifest.name!r} is not a leave-one-relation-out split")
        n_run = correct_run = 0
        for pid in manifest.test:
            if pid not in truths_by_id:
                raise EvalError(f"test pair {pid!r} has no ground truth")
            if pid not in predictions:
                raise EvalError(f"missing prediction for pair {pid!r} in run {manifest.name!r}")
            truth = truths_by_id[pid]
            pred = int(predictions[pid])
            accepted, primary = _truth_sets(truth, "domain", taxonomy)
            hit = pred == primary if mode == "strict" else pred in accepted
            confusion[pred if hit else primary, pred] += 1
            n_run += 1
            correct_run += hit
        if n_run == 0:
            raise EvalError(f"run {manifest.name!r} has an empty test set")
        per_relation[manifest.held_out] = correct_run / n_run
        total += n_run
        correct_total += correct_run
    if not per_relation:
        raise EvalError("no leave-one-out runs supplied")
    per_class = {}
    for idx, name in enumerate(names):
        row = confusion[idx].sum()
        if row:
            per_class[name] = float(confusion[idx, idx] / row)
    return EvalReport(
        task="generalization",
        mode=mode,
        accuracy=correct_total / total,
        per_class_accuracy=per_class,
        confusion=confusion,
        class_names=names,
        n_test=total,
        extras={
            "per_held_out_relation": per_relation,
            "macro_accuracy": float(np.mean(list(per_relation.values()))),
        },
    )


# --------------------------------------------------------------------------
# attribute contribution coordinates


@dataclass(frozen=True)
class ContributionPoint:
    """Relative single-attribute performance against the all-attribute model.

    x is the domain-accuracy ratio, y the relation-accuracy ratio.
    """

    attribute: str
    x: float
    y: float


def contribution_points(single_attribute_accuracies, all_attribute_accuracies) -> list[ContributionPoint]:
    """Normalize per-attribute (relation_acc, domain_acc) pairs.

    ``single_attribute_accuracies`` maps attribute name to
    (relation_accuracy, domain_accuracy); ``all_attribute_accuracies`` is
    the same pair for the fused model. All accuracies must lie in (0, 1].
    """
    all_rel, all_dom = all_attribute_accuracies
    for label, value in (("relation", all_rel), ("domain", all_dom)):
        if not 0.0 < value <= 1.0:
            raise EvalError(f"all-attribute {label} accuracy {value!r} outside (0, 1]")
    points = []
    for attribute in single_attribute_accuracies:
        rel, dom = single_attribute_accuracies[attribute]
        for label, value in (("relation", rel), ("domain", dom)):
            if not 0.0 < value <= 1.0:
                raise EvalError(f"{attribute}: {label} accuracy {value!r} outside (0, 1]")
        points.append(ContributionPoint(attribute=attribute, x=dom / all_dom, y=rel / all_rel))
    return points


def save_contribution_tsv(path, points) -> None:
    """TSV ``attribute x y`` with full-precision coordinates."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("attribute\tx\ty\n")
        for p in points:
            fh.write(f"{p.attribute}\t{p.x!r}\t{p.y!r}\n")


def load_contribution_tsv(path) -> list[ContributionPoint]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != ["attribute", "x", "y"]:
        raise InputError(f"{path}: expected header 'attribute\\tx\\ty'")
    points = []
    for line in lines[1:]:
        if not line:
            continue
        attribute, x, y = line.split("\t")
        points.append(ContributionPoint(attribute, float(x), float(y)))
    return points
