"""Sparse multinomial logistic regression with explicit per-(label, feature) weights.

The objective is the summed softmax negative log-likelihood plus either
``lam/2 * ||W||_2^2`` or ``lam * ||W||_1``; biases are never penalised.
L1 is solved as a bound-constrained smooth problem over ``W = W+ - W-`` with
``W+, W- >= 0``, which leaves untouched coordinates at exactly zero.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import optimize, sparse

from .labels import NIL

log = logging.getLogger(__name__)

MODEL_FORMAT = "snapgrid-lr/1"


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    regularizer: str = "l2"
    lam: float = 1.0
    tolerance: float = 1e-6
    max_epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.regularizer not in ("l1", "l2"):
            raise ValueError(f"regularizer must be 'l1' or 'l2', got {self.regularizer!r}")
        if not self.lam >= 0:
            raise ValueError("lambda must be non-negative")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be positive")

    @classmethod
    def default_for(cls, regularizer, **kw):
        lam = 0.1 if regularizer == "l1" else 1.0
        return cls(regularizer=regularizer, lam=kw.pop("lam", lam), **kw)

    def to_json(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_json(cls, d):
        d = dict(d)
        d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass
class LRModel:
    labels: tuple[str, ...]
    weights: dict[str, dict[str, float]]  # feature -> label -> weight, zeros never stored
    bias: dict[str, float]
    config: TrainConfig = field(default_factory=TrainConfig)
    meta: dict = field(default_factory=dict)
    history: list = field(default_factory=list, compare=False, repr=False)

    def weight(self, label, feature) -> float:
        return self.weights.get(feature, {}).get(label, 0.0)

    def items(self):
        """``((label, feature), weight)`` pairs in deterministic order."""
        order = {lab: i for i, lab in enumerate(self.labels)}
        for feat in sorted(self.weights):
            row = self.weights[feat]
            for lab in sorted(row, key=order.__getitem__):
                yield (lab, feat), row[lab]

    def scores(self, vector: Mapping[str, float]) -> dict[str, float]:
        out = dict(self.bias)
        for feat in sorted(vector):
            row = self.weights.get(feat)
            if row:
                c = vector[feat]
                for lab, w in row.items():
                    out[lab] += c * w
        return out

    def nonzero_count(self) -> int:
        return sum(len(row) for row in self.weights.values())

    def restrict(self, keep) -> "LRModel":
        """Submodel holding only features for which ``keep(feature)`` is true."""
        kept = {f: dict(row) for f, row in self.weights.items() if keep(f)}
        return LRModel(self.labels, kept, dict(self.bias), self.config, dict(self.meta))

    # -- serialisation -----------------------------------------------------

    def to_json(self):
        return {
            "format": MODEL_FORMAT,
            "labels": list(self.labels),
            "bias": {lab: self.bias[lab] for lab in self.labels},
            "weights": [{"label": lab, "feature": feat, "weight": w} for (lab, feat), w in self.items()],
            "config": self.config.to_json(),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, d) -> "LRModel":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a model file (format {d.get('format')!r})")
        labels = tuple(d["labels"])
        known = set(labels)
        weights: dict[str, dict[str, float]] = {}
        for entry in d["weights"]:
            lab, feat, w = entry["label"], entry["feature"], float(entry["weight"])
            if lab not in known:
                raise ValueError(f"weight for unknown label {lab!r}")
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight for {lab!r}/{feat!r}")
            if w != 0.0:
                weights.setdefault(feat, {})[lab] = w
        bias = {lab: float(d["bias"][lab]) for lab in labels}
        return cls(labels, weights, bias, TrainConfig.from_json(d["config"]), dict(d.get("meta", {})))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LRModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# --------------------------------------------------------------------------
# objective


def softmax_nll(W, b, X, Y):
    """Summed softmax NLL and its gradients.

    ``X`` is (n, F) sparse or dense, ``Y`` a dense one-hot (n, K) matrix.
    Returns ``(loss, grad_W, grad_b)``.
    """
    Z = X @ W + b
    Z = np.asarray(Z)
    zmax = Z.max(axis=1, keepdims=True)
    E = np.exp(Z - zmax)
    S = E.sum(axis=1, keepdims=True)
    logZ = np.log(S) + zmax
    loss = float(np.sum(logZ) - np.sum(Z * Y))
    R = E / S - Y
    gW = X.T @ R
    gb = R.sum(axis=0)
    return loss, np.asarray(gW), gb


def l2_objective(W, b, X, Y, lam):
    loss, gW, gb = softmax_nll(W, b, X, Y)
    return loss + 0.5 * lam * float(np.sum(W * W)), gW + lam * W, gb


def objective_value(W, b, X, Y, regularizer, lam):
    loss = softmax_nll(W, b, X, Y)[0]
    if regularizer == "l2":
        return loss + 0.5 * lam * float(np.sum(W * W))
    return loss + lam * float(np.sum(np.abs(W)))


# --------------------------------------------------------------------------
# training


class FeatureIndex:
    def __init__(self, features):
        self.names = sorted(features)
        self.index = {f: i for i, f in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def matrix(self, vectors):
        rows, cols, vals = [], [], []
        for r, vec in enumerate(vectors):
            for f, c in vec.items():
                j = self.index.get(f)
                if j is not None:
                    rows.append(r)
                    cols.append(j)
                    vals.append(float(c))
        return sparse.csr_matrix((vals, (rows, cols)), shape=(len(vectors), len(self.names)))


def _label_order(observed, closed_order):
    if closed_order is None:
        others = sorted(l for l in observed if l != NIL)
        return tuple(others + ([NIL] if NIL in observed else []))
    unknown = set(observed) - set(closed_order)
    if unknown:
        raise ValueError(f"labels outside the closed label set: {sorted(unknown)}")
    ordered = [l for l in closed_order if l in observed and l != NIL]
    if NIL in observed:
        ordered.append(NIL)
    return tuple(ordered)


def train(
    examples: Sequence[tuple[Mapping[str, int], str]],
    config: TrainConfig = TrainConfig(),
    label_set: Optional[Sequence[str]] = None,
    meta: Optional[dict] = None,
) -> LRModel:
    """Fit a multinomial LR model.

    ``label_set`` fixes the label order (labels absent from the data are
    dropped, Nil is always last).  The returned model's ``history`` lists the
    objective value after every optimiser iteration.
    """
    observed = {lab for _, lab in examples}
    if len(observed) < 2:
        raise TrainingError("degenerate label set: need at least two distinct labels")
    labels = _label_order(observed, label_set)
    lab_index = {l: k for k, l in enumerate(labels)}
    feats = FeatureIndex({f for vec, _ in examples for f in vec})
    X = feats.matrix([vec for vec, _ in examples])
    n, F, K = X.shape[0], len(feats), len(labels)
    Y = np.zeros((n, K))
    Y[np.arange(n), [lab_index[lab] for _, lab in examples]] = 1.0

    W, b, history = _fit(X, Y, config)

    weights: dict[str, dict[str, float]] = {}
    rows, cols = np.nonzero(W)
    for j, k in zip(rows.tolist(), cols.tolist()):
        weights.setdefault(feats.names[j], {})[labels[k]] = float(W[j, k])
    bias = {labels[k]: float(b[k]) for k in range(K)}
    model = LRModel(labels, weights, bias, config, dict(meta or {}), history)
    log.info(
        "trained %s model: %d examples, %d features, %d labels, %d non-zero weights, %d iterations",
        config.regularizer, n, F, K, model.nonzero_count(), len(history),
    )
    return model


def _fit(X, Y, config):
    F, K = X.shape[1], Y.shape[1]
    lam = config.lam
    l1 = config.regularizer == "l1"
    nw = F * K
    evals = {"n": 0, "x": None, "f": None}
    history = []

    def unpack(theta):
        if l1:
            W = (theta[:nw] - theta[nw:2 * nw]).reshape(F, K)
            b = theta[2 * nw:]
        else:
            W = theta[:nw].reshape(F, K)
            b = theta[nw:]
        return W, b

    def fun(theta):
        W, b = unpack(theta)
        if l1:
            loss, gW, gb = softmax_nll(W, b, X, Y)
            loss += lam * float(theta[:2 * nw].sum())
            g = np.concatenate([(gW + lam).ravel(), (-gW + lam).ravel(), gb])
        else:
            loss, gW, gb = l2_objective(W, b, X, Y, lam)
            g = np.concatenate([gW.ravel(), gb])
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at epoch {len(history) + 1}")
        evals["x"], evals["f"] = theta.copy(), loss
        return loss, g

    def callback(theta):
        if evals["x"] is not None and np.array_equal(theta, evals["x"]):
            f = evals["f"]
        else:
            f = fun(theta)[0]
        history.append(f)

    size = (2 * nw if l1 else nw) + K
    theta0 = np.zeros(size)
    bounds = [(0.0, None)] * (2 * nw) + [(None, None)] * K if l1 else None
    res = optimize.minimize(
        fun,
        theta0,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        callback=callback,
        options={"maxiter": config.max_epochs, "gtol": config.tolerance, "ftol": 1e-15, "maxcor": 20},
    )
    W, b = unpack(res.x)
    return np.array(W), np.array(b), history


def optimality_residual(model: LRModel, examples) -> float:
    """Max-norm of the proximal-gradient map (unit step) at the model's parameters."""
    labels = model.labels
    lab_index = {l: k for k, l in enumerate(labels)}
    feats = FeatureIndex({f for vec, _ in examples for f in vec})
    X = feats.matrix([vec for vec, _ in examples])
    Y = np.zeros((X.shape[0], len(labels)))
    Y[np.arange(X.shape[0]), [lab_index[lab] for _, lab in examples]] = 1.0
    W = np.zeros((len(feats), len(labels)))
    for (lab, feat), w in model.items():
        if feat in feats.index:
            W[feats.index[feat], lab_index[lab]] = w
    b = np.array([model.bias[l] for l in labels])
    _, gW, gb = softmax_nll(W, b, X, Y)
    lam = model.config.lam
    if model.config.regularizer == "l2":
        gW = gW + lam * W
        return float(max(np.abs(gW).max(initial=0.0), np.abs(gb).max(initial=0.0)))
    step = W - gW
    prox = np.sign(step) * np.maximum(np.abs(step) - lam, 0.0)
    return float(max(np.abs(W - prox).max(initial=0.0), np.abs(gb).max(initial=0.0)))


# --------------------------------------------------------------------------
# inference


def predict(model: LRModel, vector: Mapping[str, float], allowed: Optional[Sequence[str]] = None):
    """``(label, scores)``: argmax of the linear scores, ties to the earlier label.

    ``allowed`` restricts the argmax to a subset of the model's labels.
    """
    scores = model.scores(vector)
    candidates = model.labels if allowed is None else [l for l in model.labels if l in set(allowed)]
    best = None
    for lab in candidates:
        if best is None or scores[lab] > scores[best]:
            best = lab
    return best, scores


def nonzero_count(model: Optional[LRModel]) -> int:
    return 0 if model is None else model.nonzero_count()
