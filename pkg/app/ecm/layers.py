# app/ecm/layers.py
"""
Маленькие детерминированные слои: Linear, SiLU, softmax.

Суммы считаются явным циклом по входным каналам в фиксированном порядке,
без BLAS: результат для пикселя не зависит от размера батча и числа потоков.
"""

from dataclasses import dataclass

import numpy as np

from app.errors import InvalidArgumentError


def _frozen(value, shape: tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.shape != shape:
        raise InvalidArgumentError(f"{name} must have shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Linear:
    """y = W x + b, weight: (out, in), bias: (out,)."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        weight = np.asarray(self.weight, dtype=np.float64)
        if weight.ndim != 2:
            raise InvalidArgumentError(f"weight must be 2-D, got shape {weight.shape}")
        out_dim, in_dim = weight.shape
        object.__setattr__(self, "weight", _frozen(weight, (out_dim, in_dim), "weight"))
        object.__setattr__(self, "bias", _frozen(self.bias, (out_dim,), "bias"))

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]

    @classmethod
    def seeded(cls, in_features: int, out_features: int, rng: np.random.Generator) -> "Linear":
        """Равномерная инициализация в ±1/sqrt(fan_in)."""
        bound = 1.0 / np.sqrt(in_features)
        weight = rng.uniform(-bound, bound, size=(out_features, in_features))
        bias = rng.uniform(-bound, bound, size=out_features)
        return cls(weight, bias)

    @classmethod
    def zeros(cls, in_features: int, out_features: int) -> "Linear":
        return cls(np.zeros((out_features, in_features)), np.zeros(out_features))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.in_features:
            raise InvalidArgumentError(
                f"expected {self.in_features} input features, got {x.shape[-1]}"
            )

        out = np.broadcast_to(self.bias, x.shape[:-1] + (self.out_features,)).copy()
        for c in range(self.in_features):
            out += x[..., c, None] * self.weight[:, c]
        return out


def silu(x: np.ndarray) -> np.ndarray:
    """x * sigmoid(x) без переполнения exp."""
    return x * np.exp(-np.logaddexp(0.0, -x))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Softmax по последней оси (со сдвигом на максимум)."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = np.exp(logits - logits.max(axis=-1, keepdims=True))

    total = np.zeros(shifted.shape[:-1] + (1,))
    for i in range(shifted.shape[-1]):
        total += shifted[..., i, None]
    return shifted / total
