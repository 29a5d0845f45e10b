#!/usr/bin/env python3
# Train the hinge-loss classifier on a toy problem and watch the objective settle.

import numpy as np

from relscope import SvmConfig, train, predict

rng = np.random.default_rng(1)
X = rng.normal(scale=1.5, size=(20, 2))
w_true = np.array([1.0, -0.5])
y = [1 if v >= 0 else -1 for v in X @ w_true + 0.3 * rng.normal(size=20)]

model = train(X, y, SvmConfig(lambda_=0.2, epochs=400, seed=0))
idx = model.classes.index(1)

trace = model.checkpoint_objectives[:, idx]
print("objective at checkpoints (every 50 epochs):")
for e in range(0, 400, 50):
    print(f"  epoch {e + 1:>3}: J = {trace[e]:.6f}")
print(f"final J = {model.objectives[idx]:.6f} (non-increasing trace: {bool(np.all(np.diff(trace) <= 0))})")

hits = sum(predict(model, x)[0] == label for x, label in zip(X, y))
print(f"train accuracy: {hits}/{len(y)}")
print(f"weights {model.weights[idx]}, bias {model.biases[idx]:.4f}")
