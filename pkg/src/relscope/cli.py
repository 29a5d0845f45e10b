"""Command-line front end: one subcommand per pipeline stage.

Exit codes: 0 on success, 1 on validation errors (including bad flags),
2 on I/O failures. All randomness flows through ``--seed``. The output
directory defaults to ``./relscope-out``, can be set through the
``RELSCOPE_OUT`` environment variable, and an explicit ``--out`` wins over
both. A JSON file passed with ``--config`` supplies values for any flag
not given on the command line (keys use underscores).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .annotations import (
    agreement_by_pair,
    consistency_filter,
    label_statistics,
    load_annotations,
    load_groundtruth,
    load_pairs,
    save_groundtruth,
)
from .errors import InputError, RelscopeError
from .evaluation import (
    accuracy_report,
    coarsen_predictions,
    contribution_points,
    generalization_report,
    save_contribution_tsv,
)
from .featstore import KIND_NAMES, AttributeRegistry, FeatureStore, pool_proximity, read_proximity_tensor
from .splits import SplitManifest, load_album_index, load_pair_list, make_ac_split, make_sr_splits
from .svm import SvmConfig, load_model, predict_many, save_model, select_lambda, train
from .synthgen import SynthSpec, generate
from .taxonomy import Taxonomy, default_taxonomy


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, per the CLI contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _resolve_out(args, config) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if "out" in config:
        return Path(config["out"])
    env = os.environ.get("RELSCOPE_OUT")
    if env:
        return Path(env)
    return Path("relscope-out")


def _opt(args, config, name, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    for key in (name, name.rstrip("_")):
        if key in config:
            return config[key]
    return default


def _load_taxonomy(args) -> Taxonomy:
    if getattr(args, "taxonomy", None):
        return Taxonomy.load(args.taxonomy)
    return default_taxonomy()


def load_feature_store(features_dir, tensors_dir=None):
    """Read the manifest plus every kind's TSV into a FeatureStore.

    With ``tensors_dir`` given, the proximity blocks are rebuilt by pooling
    the raw tensor files instead of reading the proximity TSV.
    """
    features_dir = Path(features_dir)
    registry = AttributeRegistry.load(features_dir / "manifest.json")
    store = FeatureStore(registry)
    for kind in KIND_NAMES:
        if kind == "proximity" and tensors_dir is not None:
            for tensor_path in sorted(Path(tensors_dir).glob("*.prx")):
                tensor = read_proximity_tensor(tensor_path)
                store.add(kind, tensor_path.stem, pool_proximity(tensor, registry.proximity_tensor_shape))
        else:
            store.load_tsv(features_dir / f"{kind}.tsv", kind)
    return registry, store


def _labels_for(truths, task: str, taxonomy: Taxonomy, include_cross_domain: bool):
    """pair_id -> class index for training; cross-domain pairs can be
    excluded from domain-level targets."""
    labels = {}
    for t in truths:
        if task == "domain" and t.cross_domain and not include_cross_domain:
            continue
        labels[t.pair_id] = t.primary if task == "relation" else t.domain
    return labels


@dataclass
class TrainedRun:
    model: object
    standardizer: object
    predictions: dict   # test pair_id -> predicted class index
    kinds: tuple


def train_and_predict(store, truths_by_id, manifest: SplitManifest, task: str, kinds,
                      svm_config: SvmConfig, taxonomy: Taxonomy,
                      include_cross_domain: bool = False, lambda_grid=None) -> TrainedRun:
    """Standardize on the manifest's train pairs, fit, and predict its test."""
    labels = _labels_for((truths_by_id[p] for p in manifest.train if p in truths_by_id),
                         task, taxonomy, include_cross_domain)
    train_ids = [p for p in manifest.train if p in labels]
    if not train_ids:
        raise InputError(f"split {manifest.name!r} has no usable training pairs for task {task!r}")
    standardizer = store.fit_standardizer(train_ids, kinds)
    X = store.fuse_matrix(train_ids, kinds, standardizer)
    y = [labels[p] for p in train_ids]
    if lambda_grid:
        val_ids = [p for p in manifest.val if p in truths_by_id]
        if val_ids:
            val_labels = _labels_for((truths_by_id[p] for p in val_ids), task, taxonomy, True)
            X_val = store.fuse_matrix(val_ids, kinds, standardizer)
            y_val = [val_labels[p] for p in val_ids]
            from dataclasses import replace
            best = select_lambda(X, y, X_val, y_val, lambda_grid, svm_config)
            svm_config = replace(svm_config, lambda_=best)
    model = train(X, y, svm_config)
    test_ids = list(manifest.test)
    predictions = {}
    if test_ids:
        X_test = store.fuse_matrix(test_ids, kinds, standardizer)
        pred_labels, _ = predict_many(model, X_test)
        predictions = dict(zip(test_ids, pred_labels))
    return TrainedRun(model=model, standardizer=standardizer, predictions=predictions,
                      kinds=store.registry.ordered(kinds))


# --------------------------------------------------------------------------
# subcommands


def cmd_synth(args, config) -> int:
    out = _resolve_out(args, config)
    spec = SynthSpec(
        n_pairs=int(_opt(args, config, "pairs", 800)),
        n_identities=int(_opt(args, config, "identities", 160)),
        n_photos=int(_opt(args, config, "photos", 400)),
        n_albums=int(_opt(args, config, "albums", 30)),
        n_annotators=int(_opt(args, config, "annotators", 5)),
        noise=float(_opt(args, config, "noise", 0.1)),
        margin=float(_opt(args, config, "margin", 10.0)),
        seed=int(_opt(args, config, "seed", 0)),
    )
    paths = generate(spec, out, _load_taxonomy(args), write_features=not args.no_features)
    print(f"synthetic corpus written to {out}")
    for key in sorted(paths):
        print(f"  {key}: {paths[key]}")
    return 0


def _check_threshold(threshold: int) -> int:
    if not 1 <= threshold <= 5:
        raise InputError(f"consistency threshold must be in 1..5, got {threshold}")
    return threshold


def _compute_groundtruth(args, config, taxonomy):
    pairs = load_pairs(args.pairs)
    records = load_annotations(args.annotations, taxonomy, known_pairs={p.pair_id for p in pairs})
    threshold = _check_threshold(int(_opt(args, config, "threshold", 3)))
    results = agreement_by_pair(records, threshold)
    truths = consistency_filter((r for r in results.values() if r is not None), threshold, taxonomy)
    return pairs, records, results, truths, threshold


def cmd_agree(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    taxonomy = _load_taxonomy(args)
    _, _, results, truths, threshold = _compute_groundtruth(args, config, taxonomy)
    save_groundtruth(out / "groundtruth.json", truths, taxonomy)
    retained = len(truths) / len(results) if results else 0.0
    summary = {
        "threshold": threshold,
        "pairs": len(results),
        "retained": len(truths),
        "retained_fraction": retained,
        "cross_domain": sum(t.cross_domain for t in truths),
    }
    (out / "agreement.json").write_text(json.dumps(summary, indent=1) + "\n", encoding="utf-8")
    print(f"retained {len(truths)}/{len(results)} pairs (fraction {retained:.4f}) at threshold {threshold}")
    print(f"ground truth written to {out / 'groundtruth.json'}")
    return 0


def cmd_stats(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    taxonomy = _load_taxonomy(args)
    known = {p.pair_id for p in load_pairs(args.pairs)} if args.pairs else None
    records = load_annotations(args.annotations, taxonomy, known_pairs=known)
    report = label_statistics(records, taxonomy)
    (out / "stats.json").write_text(json.dumps(report.to_json(), indent=1) + "\n", encoding="utf-8")
    text = report.render()
    (out / "stats.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_split_ac(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    taxonomy = _load_taxonomy(args)
    truths = load_groundtruth(args.groundtruth, taxonomy)
    album_index = load_album_index(args.albums)
    preserved = load_pair_list(args.test_list)
    if args.intersect_test:
        gt_ids = {t.pair_id for t in truths}
        preserved = [p for p in preserved if p in gt_ids]
    manifest = make_ac_split(
        truths, album_index, preserved,
        n_val_albums=int(_opt(args, config, "val_albums", 8)),
        seed=int(_opt(args, config, "seed", 0)),
    )
    manifest.save(out / "ac.json")
    print(f"AC split: {len(manifest.train)} train / {len(manifest.val)} val / {len(manifest.test)} test"
          f" -> {out / 'ac.json'}")
    return 0


def cmd_split_sr(args, config) -> int:
    out = _resolve_out(args, config)
    sr_dir = out / "sr"
    sr_dir.mkdir(parents=True, exist_ok=True)
    taxonomy = _load_taxonomy(args)
    truths = load_groundtruth(args.groundtruth, taxonomy)
    pairs_by_id = {p.pair_id: p for p in load_pairs(args.pairs)}
    results = make_sr_splits(
        truths, pairs_by_id, taxonomy,
        n_folds=int(_opt(args, config, "folds", 10)),
        seed=int(_opt(args, config, "seed", 0)),
    )
    for manifest, diagnostics in results:
        manifest.save(sr_dir / f"{manifest.name}.json")
        print(f"{manifest.name}: {len(manifest.train)} train / {len(manifest.val)} val / "
              f"{len(manifest.test)} test ({len(diagnostics.discarded)} discarded)")
    print(f"{len(results)} manifests -> {sr_dir}")
    return 0


def _parse_kinds(text):
    if not text or text == "all":
        return None
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    return kinds or None


def cmd_fuse(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    _, store = load_feature_store(args.features, args.tensors)
    manifest = SplitManifest.load(args.split)
    kinds = _parse_kinds(args.kinds)
    standardizer = store.fit_standardizer(list(manifest.train), kinds)
    standardizer.save(out / "standardizer.json")
    for part in ("train", "val", "test"):
        ids = list(getattr(manifest, part))
        matrix = store.fuse_matrix(ids, kinds, standardizer)
        path = out / f"fused_{part}.tsv"
        with path.open("w", encoding="utf-8") as fh:
            fh.write("\t".join(["pair_id"] + [f"v{i}" for i in range(matrix.shape[1])]) + "\n")
            for pid, row in zip(ids, matrix):
                fh.write(pid + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
        print(f"{part}: {len(ids)} rows x {matrix.shape[1]} dims -> {path}")
    return 0


def _parse_class_weights(text, task, taxonomy):
    """``name=weight`` pairs, comma separated, mapped to class indices."""
    if not text:
        return ()
    weights = []
    for entry in text.split(","):
        if "=" not in entry:
            raise InputError(f"bad class weight {entry!r}, expected name=weight")
        name, value = entry.rsplit("=", 1)
        label = taxonomy.parse_relation(name) if task == "relation" else taxonomy.parse_domain(name)
        weights.append((label, float(value)))
    return tuple(weights)


def cmd_train(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    taxonomy = _load_taxonomy(args)
    truths = load_groundtruth(args.groundtruth, taxonomy)
    truths_by_id = {t.pair_id: t for t in truths}
    _, store = load_feature_store(args.features, args.tensors)
    manifest = SplitManifest.load(args.split)
    svm_config = SvmConfig(
        lambda_=float(_opt(args, config, "lambda_", 0.01)),
        epochs=int(_opt(args, config, "epochs", 30)),
        seed=int(_opt(args, config, "seed", 0)),
        class_weights=_parse_class_weights(args.class_weights, args.task, taxonomy),
    )
    grid = tuple(float(v) for v in args.lambda_grid.split(",")) if args.lambda_grid else None
    run = train_and_predict(store, truths_by_id, manifest, args.task, _parse_kinds(args.kinds),
                            svm_config, taxonomy, include_cross_domain=args.include_cross_domain,
                            lambda_grid=grid)
    save_model(out / f"{args.task}_model.txt", run.model)
    run.standardizer.save(out / f"{args.task}_standardizer.json")
    print(f"trained {args.task} model on {len(manifest.train)} pairs "
          f"(lambda {run.model.config.lambda_}) -> {out / f'{args.task}_model.txt'}")
    return 0


def cmd_eval(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    taxonomy = _load_taxonomy(args)
    truths = load_groundtruth(args.groundtruth, taxonomy)
    truths_by_id = {t.pair_id: t for t in truths}
    _, store = load_feature_store(args.features, args.tensors)
    manifest = SplitManifest.load(args.split)
    model = load_model(args.model)
    from .featstore import Standardizer
    standardizer = Standardizer.load(args.standardizer) if args.standardizer else None
    kinds = _parse_kinds(args.kinds)
    test_ids = list(manifest.test)
    X = store.fuse_matrix(test_ids, kinds, standardizer)
    labels, _ = predict_many(model, X)
    predictions = dict(zip(test_ids, labels))
    mode = _opt(args, config, "eval_mode", "any-of-set")
    report = accuracy_report(predictions, [truths_by_id[p] for p in test_ids if p in truths_by_id],
                             taxonomy, task=args.task, mode=mode)
    report.save(out / f"{args.task}_report.json")
    (out / f"{args.task}_report.txt").write_text(report.render() + "\n", encoding="utf-8")
    print(report.render())
    return 0


def cmd_generalize(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    taxonomy = _load_taxonomy(args)
    truths = load_groundtruth(args.groundtruth, taxonomy)
    truths_by_id = {t.pair_id: t for t in truths}
    _, store = load_feature_store(args.features, args.tensors)
    manifests = [SplitManifest.load(p) for p in sorted(Path(args.splits).glob("*.json"))]
    if not manifests:
        raise InputError(f"no split manifests found under {args.splits}")
    svm_config = SvmConfig(
        lambda_=float(_opt(args, config, "lambda_", 0.01)),
        epochs=int(_opt(args, config, "epochs", 30)),
        seed=int(_opt(args, config, "seed", 0)),
    )
    mode = _opt(args, config, "eval_mode", "any-of-set")
    runs = []
    for manifest in manifests:
        run = train_and_predict(store, truths_by_id, manifest, "domain", _parse_kinds(args.kinds),
                                svm_config, taxonomy)
        runs.append((manifest, run.predictions))
    report = generalization_report(runs, truths_by_id, taxonomy, mode=mode)
    report.save(out / "generalization_report.json")
    (out / "generalization_report.txt").write_text(report.render() + "\n", encoding="utf-8")
    print(report.render())
    return 0


def cmd_contrib(args, config) -> int:
    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    payload = json.loads(Path(args.accuracies).read_text(encoding="utf-8"))
    try:
        all_pair = tuple(payload["all"])
        singles = {k: tuple(v) for k, v in payload["attributes"].items()}
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad accuracies file: {exc}") from exc
    points = contribution_points(singles, all_pair)
    save_contribution_tsv(out / "contrib.tsv", points)
    for p in points:
        print(f"{p.attribute:<18} x={p.x:.3f} y={p.y:.3f}")
    print(f"contribution points -> {out / 'contrib.tsv'}")
    return 0


# --------------------------------------------------------------------------
# full pipeline


@dataclass
class RunAllConfig:
    out: Path
    seed: int = 0
    n_pairs: int = 800
    n_identities: int = 160
    n_photos: int = 400
    n_albums: int = 30
    noise: float = 0.1
    margin: float = 10.0
    threshold: int = 3
    val_albums: int = 8
    folds: int = 10
    epochs: int = 30
    lambda_: float = 0.01
    lambda_grid: tuple | None = None
    eval_mode: str = "any-of-set"
    with_contrib: bool = True


def run_all(cfg: RunAllConfig, taxonomy: Taxonomy | None = None) -> dict:
    """synth -> agree -> split -> fuse -> train -> eval -> contrib, end to end.

    Returns the summary dict that is also written to ``summary.json``.
    """
    taxonomy = taxonomy or default_taxonomy()
    _check_threshold(cfg.threshold)
    out = Path(cfg.out)
    synth_dir = out / "synth"
    spec = SynthSpec(n_pairs=cfg.n_pairs, n_identities=cfg.n_identities, n_photos=cfg.n_photos,
                     n_albums=cfg.n_albums, noise=cfg.noise, margin=cfg.margin, seed=cfg.seed)
    generate(spec, synth_dir, taxonomy)

    pairs = load_pairs(synth_dir / "pairs.tsv")
    pairs_by_id = {p.pair_id: p for p in pairs}
    records = load_annotations(synth_dir / "annotations.tsv", taxonomy, known_pairs=set(pairs_by_id))
    results = agreement_by_pair(records, cfg.threshold)
    truths = consistency_filter((r for r in results.values() if r is not None), cfg.threshold, taxonomy)
    truths_by_id = {t.pair_id: t for t in truths}

    agree_dir = out / "agree"
    agree_dir.mkdir(parents=True, exist_ok=True)
    save_groundtruth(agree_dir / "groundtruth.json", truths, taxonomy)
    stats = label_statistics(records, taxonomy)
    (agree_dir / "stats.json").write_text(json.dumps(stats.to_json(), indent=1) + "\n", encoding="utf-8")
    (agree_dir / "stats.txt").write_text(stats.render() + "\n", encoding="utf-8")

    album_index = load_album_index(synth_dir / "albums.tsv")
    preserved = [p for p in load_pair_list(synth_dir / "preserved_test.txt") if p in truths_by_id]
    split_dir = out / "splits"
    sr_dir = split_dir / "sr"
    sr_dir.mkdir(parents=True, exist_ok=True)
    ac = make_ac_split(truths, album_index, preserved, n_val_albums=cfg.val_albums, seed=cfg.seed)
    ac.save(split_dir / "ac.json")
    sr_results = make_sr_splits(truths, pairs_by_id, taxonomy, n_folds=cfg.folds, seed=cfg.seed)
    for manifest, _ in sr_results:
        manifest.save(sr_dir / f"{manifest.name}.json")

    _, store = load_feature_store(synth_dir / "features")
    svm_config = SvmConfig(lambda_=cfg.lambda_, epochs=cfg.epochs, seed=cfg.seed)
    train_dir = out / "train"
    eval_dir = out / "eval"
    train_dir.mkdir(parents=True, exist_ok=True)
    eval_dir.mkdir(parents=True, exist_ok=True)

    test_truths = [truths_by_id[p] for p in ac.test]
    relation_run = train_and_predict(store, truths_by_id, ac, "relation", None, svm_config,
                                     taxonomy, lambda_grid=cfg.lambda_grid)
    save_model(train_dir / "relation_model.txt", relation_run.model)
    relation_run.standardizer.save(train_dir / "relation_standardizer.json")
    relation_report = accuracy_report(relation_run.predictions, test_truths, taxonomy,
                                      task="relation", mode=cfg.eval_mode)

    domain_run = train_and_predict(store, truths_by_id, ac, "domain", None, svm_config,
                                   taxonomy, lambda_grid=cfg.lambda_grid)
    save_model(train_dir / "domain_model.txt", domain_run.model)
    domain_run.standardizer.save(train_dir / "domain_standardizer.json")
    domain_report = accuracy_report(domain_run.predictions, test_truths, taxonomy,
                                    task="domain", mode=cfg.eval_mode)

    coarsened_report = accuracy_report(coarsen_predictions(relation_run.predictions, taxonomy),
                                       test_truths, taxonomy, task="domain", mode=cfg.eval_mode)

    for name, report in (("relation", relation_report), ("domain", domain_report),
                         ("domain_coarsened", coarsened_report)):
        report.save(eval_dir / f"{name}_report.json")
        (eval_dir / f"{name}_report.txt").write_text(report.render() + "\n", encoding="utf-8")

    contrib_path = None
    attribute_accuracies = {}
    if cfg.with_contrib:
        for kind in KIND_NAMES:
            rel_run = train_and_predict(store, truths_by_id, ac, "relation", [kind], svm_config, taxonomy)
            rel_acc = accuracy_report(rel_run.predictions, test_truths, taxonomy,
                                      task="relation", mode=cfg.eval_mode).accuracy
            dom_run = train_and_predict(store, truths_by_id, ac, "domain", [kind], svm_config, taxonomy)
            dom_acc = accuracy_report(dom_run.predictions, test_truths, taxonomy,
                                      task="domain", mode=cfg.eval_mode).accuracy
            attribute_accuracies[kind] = (rel_acc, dom_acc)
        (eval_dir / "attribute_accuracies.json").write_text(json.dumps({
            "all": [relation_report.accuracy, domain_report.accuracy],
            "attributes": {k: list(v) for k, v in attribute_accuracies.items()},
        }, indent=1) + "\n", encoding="utf-8")
        points = contribution_points(attribute_accuracies,
                                     (relation_report.accuracy, domain_report.accuracy))
        contrib_path = eval_dir / "contrib.tsv"
        save_contribution_tsv(contrib_path, points)

    runs = []
    for manifest, _ in sr_results:
        run = train_and_predict(store, truths_by_id, manifest, "domain", None, svm_config, taxonomy)
        runs.append((manifest, run.predictions))
    gen_report = generalization_report(runs, truths_by_id, taxonomy, mode=cfg.eval_mode)
    gen_report.save(eval_dir / "generalization_report.json")
    (eval_dir / "generalization_report.txt").write_text(gen_report.render() + "\n", encoding="utf-8")

    summary = {
        "seed": cfg.seed,
        "n_pairs": cfg.n_pairs,
        "threshold": cfg.threshold,
        "retained_fraction": len(truths) / len(results) if results else 0.0,
        "relation_accuracy": relation_report.accuracy,
        "domain_accuracy": domain_report.accuracy,
        "domain_accuracy_coarsened": coarsened_report.accuracy,
        "generalization_accuracy": gen_report.accuracy,
        "generalization_macro_accuracy": gen_report.extras["macro_accuracy"],
        "n_test": relation_report.n_test,
        "contrib_tsv": str(contrib_path) if contrib_path else None,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n", encoding="utf-8")
    return summary


def cmd_run_all(args, config) -> int:
    cfg = RunAllConfig(
        out=_resolve_out(args, config),
        seed=int(_opt(args, config, "seed", 0)),
        n_pairs=int(_opt(args, config, "pairs", 800)),
        n_identities=int(_opt(args, config, "identities", 160)),
        n_photos=int(_opt(args, config, "photos", 400)),
        n_albums=int(_opt(args, config, "albums", 30)),
        noise=float(_opt(args, config, "noise", 0.1)),
        margin=float(_opt(args, config, "margin", 10.0)),
        threshold=int(_opt(args, config, "threshold", 3)),
        val_albums=int(_opt(args, config, "val_albums", 8)),
        folds=int(_opt(args, config, "folds", 10)),
        epochs=int(_opt(args, config, "epochs", 30)),
        lambda_=float(_opt(args, config, "lambda_", 0.01)),
        lambda_grid=tuple(float(v) for v in args.lambda_grid.split(",")) if args.lambda_grid else None,
        eval_mode=_opt(args, config, "eval_mode", "any-of-set"),
        with_contrib=not args.no_contrib,
    )
    summary = run_all(cfg, _load_taxonomy(args))
    print(json.dumps(summary, indent=1))
    return 0


# --------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="relscope", description=__doc__)
    parser.add_argument("--version", action="version", version=f"relscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, taxonomy=True):
        p.add_argument("--out", help="output directory (default: $RELSCOPE_OUT or ./relscope-out)")
        p.add_argument("--config", help="JSON file supplying defaults for omitted flags")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        if taxonomy:
            p.add_argument("--taxonomy", help="taxonomy manifest JSON (default: built-in hierarchy)")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    common(p)
    p.add_argument("--pairs", type=int, help="number of person pairs (default 800)")
    p.add_argument("--identities", type=int, help="number of identities (default 160)")
    p.add_argument("--photos", type=int, help="number of photos (default 400)")
    p.add_argument("--albums", type=int, help="number of albums (default 30)")
    p.add_argument("--annotators", type=int, help="annotators per pair (default 5)")
    p.add_argument("--noise", type=float, help="annotator deviation rate (default 0.1)")
    p.add_argument("--margin", type=float, help="class margin in sigma units (default 10)")
    p.add_argument("--no-features", action="store_true", help="skip feature/tensor files")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("agree", help="compute agreement and consensus ground truth")
    common(p)
    p.add_argument("--annotations", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--threshold", type=int, help="consistency threshold (default 3)")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("stats", help="annotation label statistics")
    common(p)
    p.add_argument("--annotations", required=True)
    p.add_argument("--pairs", help="optional pairs file for id validation")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split-ac", help="all-class recognition split")
    common(p)
    p.add_argument("--groundtruth", required=True)
    p.add_argument("--albums", required=True, help="pair_id->album TSV")
    p.add_argument("--test-list", required=True, help="preserved test pair ids, one per line")
    p.add_argument("--val-albums", type=int, dest="val_albums", help="albums forming validation (default 8)")
    p.add_argument("--intersect-test", action="store_true",
                   help="drop preserved test ids missing from ground truth instead of failing")
    p.set_defaults(func=cmd_split_ac)

    p = sub.add_parser("split-sr", help="leave-one-relation-out splits")
    common(p)
    p.add_argument("--groundtruth", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--folds", type=int, help="identity folds (default 10)")
    p.set_defaults(func=cmd_split_sr)

    p = sub.add_parser("fuse", help="standardize and concatenate feature blocks")
    common(p, taxonomy=False)
    p.add_argument("--features", required=True, help="directory with manifest.json and kind TSVs")
    p.add_argument("--tensors", help="raw proximity tensor directory (pooled instead of the TSV)")
    p.add_argument("--split", required=True, help="split manifest JSON")
    p.add_argument("--kinds", help="comma-separated kinds (default all)")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("train", help="train a one-vs-rest linear SVM")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--tensors")
    p.add_argument("--groundtruth", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--task", choices=("relation", "domain"), default="relation")
    p.add_argument("--kinds", help="comma-separated kinds (default all)")
    p.add_argument("--lambda", dest="lambda_", type=float, help="regularization weight (default 0.01)")
    p.add_argument("--lambda-grid", dest="lambda_grid", help="comma-separated grid for validation selection")
    p.add_argument("--epochs", type=int, help="training epochs (default 30)")
    p.add_argument("--class-weights", dest="class_weights",
                   help="comma-separated name=weight hinge reweighting (default: none)")
    p.add_argument("--include-cross-domain", action="store_true",
                   help="keep cross-domain pairs in domain-level training")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a split's test set")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--standardizer", help="standardizer JSON saved at training time")
    p.add_argument("--features", required=True)
    p.add_argument("--tensors")
    p.add_argument("--groundtruth", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--task", choices=("relation", "domain"), default="relation")
    p.add_argument("--kinds", help="comma-separated kinds (default all)")
    p.add_argument("--eval-mode", dest="eval_mode", choices=("any-of-set", "strict"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generalize", help="train/evaluate domain models over leave-one-out splits")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--tensors")
    p.add_argument("--groundtruth", required=True)
    p.add_argument("--splits", required=True, help="directory of SR manifests")
    p.add_argument("--kinds", help="comma-separated kinds (default all)")
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--eval-mode", dest="eval_mode", choices=("any-of-set", "strict"))
    p.set_defaults(func=cmd_generalize)

    p = sub.add_parser("contrib", help="attribute contribution coordinates from accuracies JSON")
    common(p, taxonomy=False)
    p.add_argument("--accuracies", required=True,
                   help='JSON {"all": [rel, dom], "attributes": {kind: [rel, dom]}}')
    p.set_defaults(func=cmd_contrib)

    p = sub.add_parser("run-all", help="full synthetic pipeline end to end")
    common(p)
    p.add_argument("--pairs", type=int)
    p.add_argument("--identities", type=int)
    p.add_argument("--photos", type=int)
    p.add_argument("--albums", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--threshold", type=int)
    p.add_argument("--val-albums", dest="val_albums", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--lambda-grid", dest="lambda_grid")
    p.add_argument("--eval-mode", dest="eval_mode", choices=("any-of-set", "strict"))
    p.add_argument("--no-contrib", action="store_true", help="skip single-attribute contribution runs")
    p.set_defaults(func=cmd_run_all)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print(f"error: bad config file: {exc}", file=sys.stderr)
            return 1
        if not isinstance(config, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return 1
    try:
        return args.func(args, config)
    except RelscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
