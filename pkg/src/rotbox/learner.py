"""Linear offset regressor trained with smooth-L1 gradient descent.

The model is a single affine map from flattened pooled features to the five
offset components. Training is plain mini-batch gradient descent, seeded
and single-threaded, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .encoding import OffsetVector
from .errors import InvalidArgumentError, ShapeError, TrainingDivergedError
from .roi_align import PooledFeature
from .synthetic import (  # re-exported: scene synthesis feeds this module's train()
    SceneConfig,
    SyntheticScene,
    TrainingSet,
    synthesize_training_set,
)

__all__ = [
    "LinearRegressor",
    "TrainConfig",
    "TrainResult",
    "smooth_l1",
    "predict",
    "train",
    "save_model",
    "load_model",
    "SceneConfig",
    "SyntheticScene",
    "TrainingSet",
    "synthesize_training_set",
]

_OUTPUTS = 5
_FORMAT_MAGIC = "rotbox-linear-v1"


@dataclass(frozen=True)
class LinearRegressor:
    """Affine readout: offsets = features @ weights + bias."""

    weights: np.ndarray  # (feature_dim, 5)
    bias: np.ndarray  # (5,)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or w.shape[1] != _OUTPUTS or w.shape[0] < 1:
            raise ShapeError(f"weights must be (feature_dim, {_OUTPUTS}), got {w.shape}")
        if b.shape != (_OUTPUTS,):
            raise ShapeError(f"bias must be ({_OUTPUTS},), got {b.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise InvalidArgumentError("model parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class TrainConfig:
    # learning_rate 0 is allowed as a no-op probe; training needs it positive
    learning_rate: float = 0.05
    epochs: int = 300
    batch_size: int = 0  # 0 means full batch
    seed: int = 0
    smooth_l1_beta: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.learning_rate) or self.learning_rate < 0:
            raise InvalidArgumentError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise InvalidArgumentError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 0:
            raise InvalidArgumentError(f"batch_size must be >= 0, got {self.batch_size}")
        if not self.smooth_l1_beta > 0:
            raise InvalidArgumentError(f"smooth_l1_beta must be > 0, got {self.smooth_l1_beta}")


@dataclass(frozen=True)
class TrainResult:
    model: LinearRegressor
    loss_trace: tuple[float, ...]  # full-dataset mean loss after each epoch


def smooth_l1(
    pred: OffsetVector, target: OffsetVector, beta: float = 1.0
) -> tuple[float, np.ndarray]:
    """Summed per-element smooth-L1 loss and its gradient w.r.t. pred."""
    if not beta > 0:
        raise InvalidArgumentError(f"beta must be > 0, got {beta}")
    d = np.asarray(pred.astuple()) - np.asarray(target.astuple())
    small = np.abs(d) < beta
    clamped = np.clip(d, -beta, beta)  # keeps the unselected branch finite
    loss = np.where(small, 0.5 * clamped * clamped / beta, np.abs(d) - 0.5 * beta)
    grad = np.where(small, clamped / beta, np.sign(d))
    return float(loss.sum()), grad


def _as_features(pooled: Union[PooledFeature, np.ndarray]) -> np.ndarray:
    if isinstance(pooled, PooledFeature):
        return pooled.flatten()
    arr = np.asarray(pooled, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"features must be a flat vector, got shape {arr.shape}")
    return arr


def predict(model: LinearRegressor, pooled: Union[PooledFeature, np.ndarray]) -> OffsetVector:
    """Apply the affine readout to a pooled feature (or pre-flattened vector)."""
    f = _as_features(pooled)
    if f.shape[0] != model.feature_dim:
        raise ShapeError(f"feature length {f.shape[0]} != feature_dim {model.feature_dim}")
    out = f @ model.weights + model.bias
    return OffsetVector(*out)


def _stack_dataset(
    dataset: Sequence[tuple[PooledFeature, OffsetVector]],
) -> tuple[np.ndarray, np.ndarray]:
    if not dataset:
        raise InvalidArgumentError("dataset must be non-empty")
    rows = [_as_features(p) for p, _ in dataset]
    dim = rows[0].shape[0]
    for idx, row in enumerate(rows):
        if row.shape[0] != dim:
            raise ShapeError(f"dataset item {idx} has feature length {row.shape[0]}, expected {dim}")
    x = np.stack(rows)
    y = np.asarray([t.astuple() for _, t in dataset], dtype=np.float64)
    return x, y


def _mean_loss(x: np.ndarray, y: np.ndarray, w: np.ndarray, b: np.ndarray, beta: float) -> float:
    d = x @ w + b - y
    small = np.abs(d) < beta
    clamped = np.clip(d, -beta, beta)
    per_elem = np.where(small, 0.5 * clamped * clamped / beta, np.abs(d) - 0.5 * beta)
    return float(per_elem.sum(axis=1).mean())


def train(
    dataset: Sequence[tuple[PooledFeature, OffsetVector]],
    config: TrainConfig = TrainConfig(),
) -> TrainResult:
    """Mini-batch gradient descent on mean smooth-L1; returns model and trace."""
    x, y = _stack_dataset(dataset)
    m, dim = x.shape
    beta = config.smooth_l1_beta
    batch = m if config.batch_size == 0 else min(config.batch_size, m)
    rng = np.random.default_rng(config.seed)

    w = np.zeros((dim, _OUTPUTS), dtype=np.float64)
    b = np.zeros(_OUTPUTS, dtype=np.float64)
    trace: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(m)
        for start in range(0, m, batch):
            rows = order[start : start + batch]
            d = x[rows] @ w + b - y[rows]
            g = np.where(np.abs(d) < beta, np.clip(d, -beta, beta) / beta, np.sign(d))
            g /= rows.shape[0]
            w = w - config.learning_rate * (x[rows].T @ g)
            b = b - config.learning_rate * g.sum(axis=0)
        loss = _mean_loss(x, y, w, b, beta)
        if not math.isfinite(loss):
            raise TrainingDivergedError(epoch, loss)
        trace.append(loss)
    return TrainResult(LinearRegressor(w, b), tuple(trace))


def save_model(model: LinearRegressor, path: Union[str, os.PathLike]) -> None:
    """Write the parameters as a versioned JSON document."""
    doc = {
        "format": _FORMAT_MAGIC,
        "feature_dim": model.feature_dim,
        "outputs": _OUTPUTS,
        "weights": model.weights.tolist(),  # row-major: one row per feature
        "bias": model.bias.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: Union[str, os.PathLike]) -> LinearRegressor:
    """Read a model written by save_model, validating magic and dims."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"not a model file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT_MAGIC:
        raise InvalidArgumentError(f"unrecognized model format, expected {_FORMAT_MAGIC!r}")
    if doc.get("outputs") != _OUTPUTS:
        raise InvalidArgumentError(f"model must have {_OUTPUTS} outputs, got {doc.get('outputs')}")
    weights = np.asarray(doc.get("weights"), dtype=np.float64)
    bias = np.asarray(doc.get("bias"), dtype=np.float64)
    if weights.ndim != 2 or weights.shape[0] != doc.get("feature_dim"):
        raise InvalidArgumentError("weight shape disagrees with declared feature_dim")
    return LinearRegressor(weights, bias)
