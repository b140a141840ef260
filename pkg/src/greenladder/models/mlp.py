"""Fully connected ReLU network trained with Adam on mean squared error.

The architecture is a pyramid: one hidden layer of h_size units,
or two layers of (h_size, h_size // 2) when h_num is 2. Training runs
minibatches of 32 for at most 500 epochs with a deterministic plateau stop;
targets are standardized internally and predictions mapped back.
"""

from __future__ import annotations

import numpy as np

from .base import ModelSpec

DEFAULTS = {"h_size": 64, "h_num": 1, "learning_rate": 0.01}

BATCH_SIZE = 32
MAX_EPOCHS = 500
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
# Stop when the full-set loss fails to improve by this relative amount for
# PLATEAU_PATIENCE consecutive epochs.
PLATEAU_TOL = 1e-5
PLATEAU_PATIENCE = 20


def hidden_sizes(h_size: int, h_num: int) -> list[int]:
    if h_num == 1:
        return [h_size]
    if h_num == 2:
        return [h_size, h_size // 2]
    raise ValueError("h_num must be 1 or 2")


def init_params(layer_sizes: list[int], seed: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """He-initialized weights, zero biases, drawn from PCG64(seed)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X: np.ndarray) -> np.ndarray:
    a = X
    for W, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ W + b, 0.0)
    return (a @ weights[-1] + biases[-1])[:, 0]


def loss_and_grads(weights, biases, X: np.ndarray, y: np.ndarray):
    """MSE loss and its gradients w.r.t. every weight and bias."""
    acts = [X]
    a = X
    for W, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ W + b, 0.0)
        acts.append(a)
    pred = (a @ weights[-1] + biases[-1])[:, 0]
    err = pred - y
    m = y.size
    loss = float(np.mean(err**2))

    grad_w = [np.empty_like(W) for W in weights]
    grad_b = [np.empty_like(b) for b in biases]
    delta = (2.0 / m) * err[:, None]
    grad_w[-1] = acts[-1].T @ delta
    grad_b[-1] = delta.sum(axis=0)
    upstream = delta @ weights[-1].T
    for layer in range(len(weights) - 2, -1, -1):
        upstream = upstream * (acts[layer + 1] > 0)
        grad_w[layer] = acts[layer].T @ upstream
        grad_b[layer] = upstream.sum(axis=0)
        upstream = upstream @ weights[layer].T
    return loss, grad_w, grad_b


class MlpModel:
    def __init__(self, weights, biases, y_mean: float, y_sd: float):
        self.weights = weights
        self.biases = biases
        self.y_mean = y_mean
        self.y_sd = y_sd

    @classmethod
    def train(cls, X: np.ndarray, y: np.ndarray, spec: ModelSpec) -> "MlpModel":
        h_size = int(spec.get("h_size", DEFAULTS["h_size"]))
        h_num = int(spec.get("h_num", DEFAULTS["h_num"]))
        eta = float(spec.get("learning_rate", DEFAULTS["learning_rate"]))

        y_mean = float(y.mean())
        y_sd = float(y.std())
        if y_sd == 0:
            y_sd = 1.0
        ys = (y - y_mean) / y_sd

        sizes = [X.shape[1], *hidden_sizes(h_size, h_num), 1]
        weights, biases = init_params(sizes, spec.seed)
        rng = np.random.Generator(np.random.PCG64(spec.seed + 1))

        mw = [np.zeros_like(W) for W in weights]
        vw = [np.zeros_like(W) for W in weights]
        mb = [np.zeros_like(b) for b in biases]
        vb = [np.zeros_like(b) for b in biases]
        step = 0
        n = X.shape[0]
        best_loss = np.inf
        stale = 0
        for _ in range(MAX_EPOCHS):
            order = rng.permutation(n)
            for start in range(0, n, BATCH_SIZE):
                batch = order[start : start + BATCH_SIZE]
                _, gw, gb = loss_and_grads(weights, biases, X[batch], ys[batch])
                step += 1
                c1 = 1.0 - ADAM_BETA1**step
                c2 = 1.0 - ADAM_BETA2**step
                for i in range(len(weights)):
                    mw[i] = ADAM_BETA1 * mw[i] + (1 - ADAM_BETA1) * gw[i]
                    vw[i] = ADAM_BETA2 * vw[i] + (1 - ADAM_BETA2) * gw[i] ** 2
                    weights[i] -= eta * (mw[i] / c1) / (np.sqrt(vw[i] / c2) + ADAM_EPS)
                    mb[i] = ADAM_BETA1 * mb[i] + (1 - ADAM_BETA1) * gb[i]
                    vb[i] = ADAM_BETA2 * vb[i] + (1 - ADAM_BETA2) * gb[i] ** 2
                    biases[i] -= eta * (mb[i] / c1) / (np.sqrt(vb[i] / c2) + ADAM_EPS)
            epoch_loss = float(np.mean((forward(weights, biases, X) - ys) ** 2))
            if epoch_loss < best_loss - PLATEAU_TOL * max(best_loss, 1e-12):
                best_loss = epoch_loss
                stale = 0
            else:
                stale += 1
                if stale >= PLATEAU_PATIENCE:
                    break
        return cls(weights=weights, biases=biases, y_mean=y_mean, y_sd=y_sd)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return forward(self.weights, self.biases, X) * self.y_sd + self.y_mean

    def to_state(self) -> dict:
        return {
            "weights": [W.tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "y_mean": self.y_mean,
            "y_sd": self.y_sd,
        }

    @classmethod
    def from_state(cls, state: dict) -> "MlpModel":
        return cls(
            weights=[np.asarray(W, dtype=float) for W in state["weights"]],
            biases=[np.asarray(b, dtype=float) for b in state["biases"]],
            y_mean=float(state["y_mean"]),
            y_sd=float(state["y_sd"]),
        )


def flatten_params(weights, biases) -> np.ndarray:
    return np.concatenate([a.ravel() for a in weights + biases])


def unflatten_params(flat: np.ndarray, weights, biases):
    out_w, out_b = [], []
    pos = 0
    for W in weights:
        out_w.append(flat[pos : pos + W.size].reshape(W.shape))
        pos += W.size
    for b in biases:
        out_b.append(flat[pos : pos + b.size].reshape(b.shape))
        pos += b.size
    return out_w, out_b


def _activation_pattern(weights, biases, X: np.ndarray) -> np.ndarray:
    signs = []
    a = X
    for W, b in zip(weights[:-1], biases[:-1]):
        z = a @ W + b
        signs.append((z > 0).ravel())
        a = np.maximum(z, 0.0)
    return np.concatenate(signs) if signs else np.empty(0, dtype=bool)


def mlp_gradient_check(spec: ModelSpec, X, y, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Builds a freshly initialized network from `spec`, evaluates the MSE
    gradient at the initial weights over all parameters, and compares it to
    (loss(p + step) - loss(p - step)) / (2 * step) per parameter. Relative
    error uses max(|analytic|, |numeric|, 1e-6) as the denominator.
    Coordinates whose two bumped evaluations land on different ReLU
    activation patterns are skipped: the loss is not differentiable across
    a kink, so the symmetric difference estimates no derivative there.
    Cost is two forward passes per parameter, so keep inputs small.
    """
    from .base import as_matrix

    mat = as_matrix(X)
    yarr = np.asarray(y, dtype=float)
    h_size = int(spec.get("h_size", DEFAULTS["h_size"]))
    h_num = int(spec.get("h_num", DEFAULTS["h_num"]))
    sizes = [mat.shape[1], *hidden_sizes(h_size, h_num), 1]
    weights, biases = init_params(sizes, spec.seed)

    _, gw, gb = loss_and_grads(weights, biases, mat, yarr)
    analytic = flatten_params(gw, gb)
    theta = flatten_params(weights, biases)

    def evaluate(flat: np.ndarray) -> tuple[float, np.ndarray]:
        w2, b2 = unflatten_params(flat, weights, biases)
        loss = float(np.mean((forward(w2, b2, mat) - yarr) ** 2))
        return loss, _activation_pattern(w2, b2, mat)

    worst = 0.0
    for i in range(theta.size):
        up = theta.copy()
        up[i] += step
        down = theta.copy()
        down[i] -= step
        loss_up, pattern_up = evaluate(up)
        loss_down, pattern_down = evaluate(down)
        if not np.array_equal(pattern_up, pattern_down):
            continue
        numeric = (loss_up - loss_down) / (2 * step)
        denom = max(abs(analytic[i]), abs(numeric), 1e-6)
        worst = max(worst, abs(analytic[i] - numeric) / denom)
    return worst
