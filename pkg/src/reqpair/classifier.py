"""Feed-forward classification head over pair features.

One hidden ReLU layer (default 1500 units) with inverted dropout, a
softmax output over 2 (conflict/neutral) or 3 (conflict/duplicate/neutral)
classes, trained by mini-batch cross-entropy with an adaptive-moment
optimizer and validation-loss early stopping. All math is 64-bit numpy;
training is fully deterministic for a fixed seed.
"""
from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import CDN_CLASSES, CN_CLASSES
from .errors import (
    DimensionMismatchError,
    ModelFormatError,
    TrainingDataError,
    ValidationError,
)

MODEL_FORMAT_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class MLPModel:
    """Weights and hyperparameters of the one-hidden-layer head."""

    input_dim: int
    hidden_units: int
    n_classes: int
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    dropout_rate: float = 0.2
    seed: int = 0
    classes: tuple[str, ...] = ()

    def copy(self) -> "MLPModel":
        return replace(self, W1=self.W1.copy(), b1=self.b1.copy(),
                       W2=self.W2.copy(), b2=self.b2.copy())

    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]


@dataclass(frozen=True)
class TrainConfig:
    """Training-loop settings; defaults follow the head's published recipe."""

    max_epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 1e-3
    patience: int = 5
    min_delta: float = 1e-4
    val_fraction: float = 0.1
    seed: int = 0
    class_weighting: str = "none"  # "none" | "inverse"

    def __post_init__(self):
        if not (0.0 < self.val_fraction < 0.5):
            raise ValidationError("val_fraction must lie in (0, 0.5)")
        if self.max_epochs < 0 or self.batch_size < 1 or self.patience < 0:
            raise ValidationError("epoch/batch/patience settings must be non-negative")


@dataclass
class TrainReport:
    epochs_run: int
    train_loss_history: list[float]
    val_loss_history: list[float]
    stopped_early: bool
    best_epoch: int


def _default_classes(n_classes: int) -> tuple[str, ...]:
    if n_classes == 3:
        return CDN_CLASSES
    if n_classes == 2:
        return CN_CLASSES
    raise ValidationError(f"n_classes must be 2 or 3, got {n_classes}")


def init_model(input_dim: int, hidden_units: int, n_classes: int,
               seed: int, dropout_rate: float = 0.2) -> MLPModel:
    """Glorot-uniform weights, zero biases, deterministic under seed."""
    if input_dim < 1 or hidden_units < 1:
        raise ValidationError("input_dim and hidden_units must be positive")
    classes = _default_classes(n_classes)
    rng = np.random.default_rng(seed)
    limit1 = np.sqrt(6.0 / (input_dim + hidden_units))
    limit2 = np.sqrt(6.0 / (hidden_units + n_classes))
    return MLPModel(
        input_dim=input_dim,
        hidden_units=hidden_units,
        n_classes=n_classes,
        W1=rng.uniform(-limit1, limit1, size=(input_dim, hidden_units)),
        b1=np.zeros(hidden_units),
        W2=rng.uniform(-limit2, limit2, size=(hidden_units, n_classes)),
        b2=np.zeros(n_classes),
        dropout_rate=dropout_rate,
        seed=seed,
        classes=classes,
    )


def _as_matrix(features) -> np.ndarray:
    rows = [np.asarray(getattr(f, "values", f), dtype=np.float64) for f in features]
    if not rows:
        return np.zeros((0, 0), dtype=np.float64)
    return np.stack(rows)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _forward_batch(model: MLPModel, X: np.ndarray, training: bool,
                   rng: np.random.Generator | None):
    """Probabilities plus the cache needed for backprop."""
    pre = X @ model.W1 + model.b1
    hidden = np.maximum(pre, 0.0)
    mask = None
    if training and model.dropout_rate > 0.0:
        if rng is None:
            rng = np.random.default_rng(model.seed)
        keep = 1.0 - model.dropout_rate
        mask = (rng.random(hidden.shape) < keep) / keep
        hidden = hidden * mask
    logits = hidden @ model.W2 + model.b2
    probs = _softmax(logits)
    return probs, (pre, hidden, mask)


def forward(model: MLPModel, x, training: bool = False,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Class probabilities for one feature vector.

    Dropout (inverted, so inference needs no rescaling) applies to the
    hidden activations only when training=True.
    """
    vec = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if vec.ndim != 1 or vec.size != model.input_dim:
        raise DimensionMismatchError(
            f"expected input of length {model.input_dim}, got shape {vec.shape}")
    probs, _ = _forward_batch(model, vec[None, :], training, rng)
    return probs[0]


def _cross_entropy(probs: np.ndarray, y: np.ndarray,
                   sample_weights: np.ndarray | None = None) -> float:
    picked = np.clip(probs[np.arange(len(y)), y], 1e-300, None)
    losses = -np.log(picked)
    if sample_weights is not None:
        return float(np.sum(losses * sample_weights) / np.sum(sample_weights))
    return float(np.mean(losses))


def _backward(model: MLPModel, X: np.ndarray, y: np.ndarray, probs, cache,
              sample_weights: np.ndarray | None = None):
    pre, hidden, mask = cache
    n = len(y)
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    if sample_weights is not None:
        dlogits *= (sample_weights / np.sum(sample_weights))[:, None]
    else:
        dlogits /= n
    dW2 = hidden.T @ dlogits
    db2 = dlogits.sum(axis=0)
    dhidden = dlogits @ model.W2.T
    if mask is not None:
        dhidden = dhidden * mask
    dpre = dhidden * (pre > 0.0)
    dW1 = X.T @ dpre
    db1 = dpre.sum(axis=0)
    return [dW1, db1, dW2, db2]


def _labels_to_indices(labels, classes: tuple[str, ...]) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    try:
        return np.asarray([index[lab] for lab in labels], dtype=np.int64)
    except KeyError as exc:
        raise ValidationError(f"label {exc.args[0]!r} not in classes {classes}") from exc


def _stratified_split(y: np.ndarray, fraction: float, rng: np.random.Generator):
    """Per-class holdout indices; never takes a whole class into validation.

    Very small datasets where every per-class quota rounds to zero fall
    back to holding out one member of each class that can spare one.
    """
    val_idx: list[int] = []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        n_val = min(int(round(fraction * len(members))), len(members) - 1)
        if n_val > 0:
            picked = rng.permutation(members)[:n_val]
            val_idx.extend(int(i) for i in picked)
    if not val_idx:
        for cls in np.unique(y):
            members = np.flatnonzero(y == cls)
            if len(members) >= 2:
                val_idx.append(int(rng.permutation(members)[0]))
    val = np.asarray(sorted(val_idx), dtype=np.int64)
    train = np.asarray([i for i in range(len(y)) if i not in set(val_idx)], dtype=np.int64)
    return train, val


def train(model: MLPModel, features, labels, cfg: TrainConfig) -> tuple[MLPModel, TrainReport]:
    """Train a copy of the model; the input model is never mutated.

    Mini-batch cross-entropy with adaptive-moment updates; a stratified
    val_fraction split is held out and training stops once the validation
    loss has not improved by min_delta for more than `patience` epochs.
    The returned weights are those of the best-validation epoch.
    """
    X = _as_matrix(features)
    if X.size == 0:
        raise TrainingDataError("training data is empty")
    y = _labels_to_indices(labels, model.classes)
    if len(y) != len(X):
        raise ValidationError("features and labels are misaligned")
    if X.shape[1] != model.input_dim:
        raise DimensionMismatchError(
            f"feature dim {X.shape[1]} != model input dim {model.input_dim}")
    if len(np.unique(y)) < 2:
        raise TrainingDataError("training data contains a single class")

    current = model.copy()
    report = TrainReport(epochs_run=0, train_loss_history=[], val_loss_history=[],
                         stopped_early=False, best_epoch=0)
    if cfg.max_epochs == 0:
        return current, report

    rng = np.random.default_rng(cfg.seed)
    train_idx, val_idx = _stratified_split(y, cfg.val_fraction, rng)
    if len(val_idx) == 0 or len(train_idx) == 0:
        raise TrainingDataError("not enough data to carve a validation split")
    X_tr, y_tr = X[train_idx], y[train_idx]
    X_val, y_val = X[val_idx], y[val_idx]

    weights = None
    if cfg.class_weighting == "inverse":
        counts = np.bincount(y_tr, minlength=model.n_classes).astype(np.float64)
        counts[counts == 0] = 1.0
        per_class = len(y_tr) / (model.n_classes * counts)
        weights = per_class
    elif cfg.class_weighting != "none":
        raise ValidationError(f"unknown class_weighting {cfg.class_weighting!r}")

    params = current.params()
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    step = 0

    best_val = np.inf
    best_epoch = 0
    best_params = [p.copy() for p in params]

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(X_tr))
        epoch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            Xb, yb = X_tr[batch], y_tr[batch]
            wb = weights[yb] if weights is not None else None
            probs, cache = _forward_batch(current, Xb, training=True, rng=rng)
            epoch_losses.append(_cross_entropy(probs, yb, wb))
            grads = _backward(current, Xb, yb, probs, cache, wb)
            step += 1
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= ADAM_BETA1
                mi += (1.0 - ADAM_BETA1) * g
                vi *= ADAM_BETA2
                vi += (1.0 - ADAM_BETA2) * g * g
                m_hat = mi / (1.0 - ADAM_BETA1 ** step)
                v_hat = vi / (1.0 - ADAM_BETA2 ** step)
                p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

        val_probs, _ = _forward_batch(current, X_val, training=False, rng=None)
        val_loss = _cross_entropy(val_probs, y_val)
        report.train_loss_history.append(float(np.mean(epoch_losses)))
        report.val_loss_history.append(val_loss)
        report.epochs_run = epoch

        if val_loss < best_val - cfg.min_delta:
            best_val = val_loss
            best_epoch = epoch
            best_params = [p.copy() for p in params]
        if epoch - best_epoch > cfg.patience:
            report.stopped_early = True
            break

    current.W1, current.b1, current.W2, current.b2 = best_params
    report.best_epoch = best_epoch
    return current, report


def predict(model: MLPModel, features) -> list[tuple[str, np.ndarray]]:
    """(label, probability vector) per feature; ties break to the lowest index."""
    X = _as_matrix(features)
    if X.size == 0:
        return []
    if X.shape[1] != model.input_dim:
        raise DimensionMismatchError(
            f"feature dim {X.shape[1]} != model input dim {model.input_dim}")
    probs, _ = _forward_batch(model, X, training=False, rng=None)
    picks = probs.argmax(axis=1)  # argmax returns the first (lowest) index on ties
    return [(model.classes[int(k)], probs[i]) for i, k in enumerate(picks)]


def gradient_check(model: MLPModel, x, label: str, epsilon: float = 1e-5,
                   n_samples: int = 120) -> float:
    """Max relative error between analytic and central-difference gradients.

    Dropout is disabled. At least 100 parameters are sampled (all of them
    for small models); the relative error denominator is guarded at 1e-12
    so exactly-zero gradient pairs (dead ReLU paths) score 0.
    """
    if not (1e-7 <= epsilon <= 1e-3):
        raise ValidationError("epsilon must lie in [1e-7, 1e-3]")
    vec = np.asarray(getattr(x, "values", x), dtype=np.float64)
    y = _labels_to_indices([label], model.classes)
    work = model.copy()
    work.dropout_rate = 0.0

    probs, cache = _forward_batch(work, vec[None, :], training=False, rng=None)
    grads = _backward(work, vec[None, :], y, probs, cache)
    params = work.params()

    def loss_at() -> float:
        p, _ = _forward_batch(work, vec[None, :], training=False, rng=None)
        return _cross_entropy(p, y)

    sizes = [p.size for p in params]
    total = sum(sizes)
    n_samples = max(100, min(n_samples, total)) if total >= 100 else total
    rng = np.random.default_rng(model.seed)
    flat_choices = rng.choice(total, size=min(n_samples, total), replace=False)

    max_rel = 0.0
    for flat in flat_choices:
        k = 0
        while flat >= sizes[k]:
            flat -= sizes[k]
            k += 1
        param = params[k]
        idx = np.unravel_index(int(flat), param.shape)
        original = param[idx]
        param[idx] = original + epsilon
        up = loss_at()
        param[idx] = original - epsilon
        down = loss_at()
        param[idx] = original
        numeric = (up - down) / (2.0 * epsilon)
        analytic = grads[k][idx]
        denom = max(abs(analytic), abs(numeric), 1e-12)
        diff = abs(analytic - numeric)
        rel = 0.0 if diff == 0.0 else diff / denom
        max_rel = max(max_rel, rel)
    return max_rel


# ---------------------------------------------------------------------------
# Serialization: JSON envelope with base64 little-endian float64 arrays
# ---------------------------------------------------------------------------

def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode()


def _decode(blob: str, shape: tuple[int, ...], path: str) -> np.ndarray:
    try:
        raw = base64.b64decode(blob, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ModelFormatError(f"{path}: corrupt weight payload") from exc
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise ModelFormatError(
            f"{path}: corrupt file, weight payload has {len(raw)} bytes, "
            f"expected {expected}")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def save_model(model: MLPModel, path: str | Path) -> None:
    path = Path(path)
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "dims": {
            "input_dim": model.input_dim,
            "hidden_units": model.hidden_units,
            "n_classes": model.n_classes,
        },
        "weights": {
            "W1": _encode(model.W1),
            "b1": _encode(model.b1),
            "W2": _encode(model.W2),
            "b2": _encode(model.b2),
        },
        "config": {
            "dropout_rate": model.dropout_rate,
            "seed": model.seed,
            "classes": list(model.classes),
        },
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> MLPModel:
    """Load a model envelope; forward outputs round-trip bit-identically."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt file: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise ModelFormatError(f"{path}: corrupt file, missing version field")
    if doc["version"] != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model format version {doc['version']!r}; "
            f"expected {MODEL_FORMAT_VERSION}")
    try:
        dims = doc["dims"]
        cfgd = doc["config"]
        weights = doc["weights"]
        input_dim = int(dims["input_dim"])
        hidden = int(dims["hidden_units"])
        n_classes = int(dims["n_classes"])
        model = MLPModel(
            input_dim=input_dim,
            hidden_units=hidden,
            n_classes=n_classes,
            W1=_decode(weights["W1"], (input_dim, hidden), str(path)),
            b1=_decode(weights["b1"], (hidden,), str(path)),
            W2=_decode(weights["W2"], (hidden, n_classes), str(path)),
            b2=_decode(weights["b2"], (n_classes,), str(path)),
            dropout_rate=float(cfgd["dropout_rate"]),
            seed=int(cfgd["seed"]),
            classes=tuple(cfgd["classes"]),
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: corrupt file: {exc}") from exc
    if not all(np.isfinite(p).all() for p in model.params()):
        raise ModelFormatError(f"{path}: corrupt file, non-finite weights")
    return model


__all__ = [
    "MLPModel", "TrainConfig", "TrainReport", "init_model", "forward",
    "train", "predict", "gradient_check", "save_model", "load_model",
    "MODEL_FORMAT_VERSION",
]
