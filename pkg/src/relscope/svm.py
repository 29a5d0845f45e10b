"""Multiclass linear SVM: one-vs-rest, L2-regularized hinge loss.

Each class c gets its own binary problem

    J_c(w, b) = (lambda/2) ||w||^2 + (1/n) sum_i max(0, 1 - s_i (w.x_i + b))

with s_i = +1 for class-c rows and -1 otherwise. The solver is stochastic
subgradient descent with step 1/(lambda * t), one seeded pass permutation
per epoch, and iterate averaging: the per-epoch average of the iterates is
evaluated on the full objective and the best average seen so far becomes
the model (so the recorded per-epoch objective trace is non-increasing by
construction). The bias rides along as an unregularized extra coordinate.

All class subproblems share the sampling sequence, which lets one pass
update every class at once and makes training deterministic given
(X, y, config).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InputError, ShapeError, TrainError

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)


@dataclass(frozen=True)
class SvmConfig:
    lambda_: float = 0.01
    epochs: int = 30
    seed: int = 0
    tolerance: float = 1e-3   # relative objective gap versus a reference solver
    # optional ((label, weight), ...) pairs scaling each class's hinge rows;
    # empty keeps the plain, unreweighted objective
    class_weights: tuple = ()

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise InputError(f"lambda must be positive, got {self.lambda_}")
        if self.epochs < 1:
            raise InputError("epochs must be >= 1")
        object.__setattr__(self, "class_weights",
                           tuple((label, float(w)) for label, w in self.class_weights))
        if any(w <= 0 for _, w in self.class_weights):
            raise InputError("class weights must be positive")

    def to_json(self) -> dict:
        return {"lambda": self.lambda_, "epochs": self.epochs,
                "seed": self.seed, "tolerance": self.tolerance,
                "class_weights": [[label, w] for label, w in self.class_weights]}

    @classmethod
    def from_json(cls, payload: dict) -> "SvmConfig":
        return cls(lambda_=payload["lambda"], epochs=int(payload["epochs"]),
                   seed=int(payload["seed"]), tolerance=float(payload["tolerance"]),
                   class_weights=tuple((label, w) for label, w in payload.get("class_weights", ())))


@dataclass(frozen=True)
class SvmModel:
    """Per-class weight vectors and biases plus training diagnostics.

    ``objectives`` holds the final (best-checkpoint) objective per class;
    ``checkpoint_objectives`` is the (epochs, n_classes) monotone trace.
    """

    classes: tuple
    weights: np.ndarray
    biases: np.ndarray
    config: SvmConfig
    objectives: np.ndarray
    checkpoint_objectives: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    def decision_values(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ShapeError((self.dim,), x.shape, "feature vector")
        return x @ self.weights.T + self.biases


def hinge_objectives(X, signs, weights, biases, lambda_, row_weights=None) -> np.ndarray:
    """Objective J_c for every class row of ``signs`` at the given iterate."""
    margins = signs * (weights @ X.T + biases[:, None])
    hinge = np.maximum(0.0, 1.0 - margins)
    if row_weights is not None:
        hinge = hinge * row_weights
    return 0.5 * lambda_ * (weights ** 2).sum(axis=1) + hinge.mean(axis=1)


def _sign_matrix(y, classes) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    signs = -np.ones((len(classes), len(y)), dtype=np.float64)
    for col, label in enumerate(y):
        signs[index[label], col] = 1.0
    return signs


def _exact_bias(X, signs, weights, row_weights=None) -> np.ndarray:
    """Per-class minimizer of the mean hinge over the bias alone.

    For fixed w the hinge term is convex piecewise-linear in b with
    breakpoints at s_i - w.x_i, so scanning the sorted breakpoints with
    prefix sums yields the exact minimizer. The bias is the objective's
    only non-strongly-convex coordinate; solving it in closed form at each
    checkpoint removes its slow O(1/sqrt(T)) averaging error.
    """
    beta = signs - weights @ X.T                    # (K, n) breakpoints
    order = np.argsort(beta, axis=1)
    bs = np.take_along_axis(beta, order, axis=1)
    pos = np.take_along_axis(signs > 0, order, axis=1).astype(np.float64)
    neg = 1.0 - pos
    if row_weights is not None:
        sorted_w = np.take_along_axis(np.broadcast_to(row_weights, signs.shape), order, axis=1)
        pos = pos * sorted_w
        neg = neg * sorted_w
    pos_above_count = np.cumsum(pos[:, ::-1], axis=1)[:, ::-1]
    pos_above_sum = np.cumsum((pos * bs)[:, ::-1], axis=1)[:, ::-1]
    neg_below_count = np.cumsum(neg, axis=1)
    neg_below_sum = np.cumsum(neg * bs, axis=1)
    # hinge total at b = bs[:, j]; the j-th term itself contributes zero
    g = (pos_above_sum - bs * pos_above_count) + (bs * neg_below_count - neg_below_sum)
    j_star = np.argmin(g, axis=1)
    return np.take_along_axis(bs, j_star[:, None], axis=1)[:, 0]


def train(X, y, config: SvmConfig = SvmConfig()) -> SvmModel:
    """Fit one-vs-rest linear classifiers.

    Requires at least two rows, two distinct labels, and finite features.
    Classes are ordered by sorted label value; re-running with identical
    inputs and seed reproduces the model bit for bit.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = [label.item() if isinstance(label, np.generic) else label for label in y]
    if X.ndim != 2:
        raise ShapeError(("n", "dim"), X.shape, "training matrix")
    if X.shape[0] != len(y):
        raise InputError(f"{X.shape[0]} rows but {len(y)} labels")
    if X.shape[0] < 2:
        raise TrainError("need at least two training rows")
    if not np.all(np.isfinite(X)):
        raise InputError("non-finite feature values")
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise TrainError(f"need at least two distinct labels, got {classes}")

    n, dim = X.shape
    k = len(classes)
    lam = config.lambda_
    signs = _sign_matrix(y, classes)
    weight_of = dict(config.class_weights)
    row_weights = None
    if weight_of:
        unknown = set(weight_of) - set(classes)
        if unknown:
            raise InputError(f"class weights for labels not in the data: {sorted(unknown)}")
        row_weights = np.array([weight_of.get(label, 1.0) for label in y])
    rng = np.random.default_rng(config.seed)
    # Warm-start offset: with step 1/(lambda*t) alone the first update is a
    # 1/lambda kick that the unregularized bias never decays away from; the
    # shift bounds early steps near 1 and leaves the asymptotics unchanged.
    t0 = int(np.ceil(1.0 / lam))

    W = np.zeros((k, dim))
    B = np.zeros(k)
    best_W = np.zeros((k, dim))
    best_B = np.zeros(k)
    best_J = hinge_objectives(X, signs, best_W, best_B, lam, row_weights)  # all-zero model
    trace = np.empty((config.epochs, k))

    # Cumulative iterate sums at each epoch boundary; the checkpoint at
    # epoch e averages the trailing half of the run (epochs e//2 .. e).
    cum_W = np.zeros_like(W)
    cum_B = np.zeros_like(B)
    boundaries = []

    t = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            x = X[i]
            s = signs[:, i]
            active = s * (W @ x + B) < 1.0
            W *= 1.0 - 1.0 / (t + t0)  # (1 - eta*lambda) with eta = 1/(lambda*(t+t0))
            if active.any():
                step = (1.0 / (lam * (t + t0))) * s[active]
                if row_weights is not None:
                    step = step * row_weights[i]
                W[active] += step[:, None] * x
                B[active] += step
            cum_W += W
            cum_B += B
        boundaries.append((cum_W.copy(), cum_B.copy()))
        start = epoch // 2
        if start == 0:
            steps = n * (epoch + 1)
            avg_W, avg_B = cum_W / steps, cum_B / steps
        else:
            prev_W, prev_B = boundaries[start - 1]
            steps = n * (epoch + 1 - start)
            avg_W, avg_B = (cum_W - prev_W) / steps, (cum_B - prev_B) / steps
        refit_B = _exact_bias(X, signs, avg_W, row_weights)
        J_avg = hinge_objectives(X, signs, avg_W, avg_B, lam, row_weights)
        J_refit = hinge_objectives(X, signs, avg_W, refit_B, lam, row_weights)
        take_refit = J_refit < J_avg
        cand_B = np.where(take_refit, refit_B, avg_B)
        J = np.minimum(J_refit, J_avg)
        improved = J < best_J
        if improved.any():
            best_W[improved] = avg_W[improved]
            best_B[improved] = cand_B[improved]
            best_J = np.minimum(best_J, J)
        trace[epoch] = best_J

    return SvmModel(
        classes=classes,
        weights=best_W,
        biases=best_B,
        config=config,
        objectives=best_J,
        checkpoint_objectives=trace,
    )


def predict(model: SvmModel, x):
    """Argmax one-vs-rest decoding; exact ties go to the lowest class index."""
    decisions = model.decision_values(np.asarray(x, dtype=np.float64))
    if decisions.ndim != 1:
        raise ShapeError((model.dim,), np.asarray(x).shape, "feature vector")
    return model.classes[int(np.argmax(decisions))], decisions


def predict_many(model: SvmModel, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise ShapeError(("n", model.dim), X.shape, "feature matrix")
    decisions = model.decision_values(X)
    labels = [model.classes[i] for i in np.argmax(decisions, axis=1)]
    return labels, decisions


def accuracy_of(model: SvmModel, X, y) -> float:
    labels, _ = predict_many(model, X)
    y = list(y)
    return sum(p == t for p, t in zip(labels, y)) / len(y)


def select_lambda(X_train, y_train, X_val, y_val, grid=DEFAULT_LAMBDA_GRID,
                  config: SvmConfig = SvmConfig()) -> float:
    """Pick the grid value maximizing validation accuracy; ties go small."""
    grid = sorted(grid)
    if not grid:
        raise InputError("lambda grid is empty")
    best_lambda, best_acc = None, -1.0
    for lam in grid:
        model = train(X_train, y_train, replace(config, lambda_=lam))
        acc = accuracy_of(model, X_val, y_val)
        if acc > best_acc:
            best_lambda, best_acc = lam, acc
    return best_lambda


# --------------------------------------------------------------------------
# model files: one-line JSON header, then one whitespace-separated line of
# decimal floats (w then b) per class, 17 significant digits.


def save_model(path, model: SvmModel) -> None:
    header = {
        "format": "relscope-svm-1",
        "classes": list(model.classes),
        "dim": model.dim,
        "config": model.config.to_json(),
        "objectives": [float(v) for v in model.objectives],
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for row, bias in zip(model.weights, model.biases):
            values = [f"{v:.17g}" for v in row] + [f"{bias:.17g}"]
            fh.write(" ".join(values) + "\n")


def load_model(path) -> SvmModel:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
            if header.get("format") != "relscope-svm-1":
                raise InputError(f"{path}: unknown model format")
            classes = tuple(header["classes"])
            dim = int(header["dim"])
            config = SvmConfig.from_json(header["config"])
            objectives = np.array(header["objectives"], dtype=np.float64)
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: bad model header: {exc}") from exc
        weights = np.empty((len(classes), dim))
        biases = np.empty(len(classes))
        for idx in range(len(classes)):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise InputError(f"{path}: class row {idx} has {len(parts)} values, expected {dim + 1}")
            weights[idx] = [float(v) for v in parts[:dim]]
            biases[idx] = float(parts[dim])
    return SvmModel(
        classes=classes,
        weights=weights,
        biases=biases,
        config=config,
        objectives=objectives,
        checkpoint_objectives=np.empty((0, len(classes))),
    )
