"""Reward and data generators for the benchmark experiments.

Contextual bandits (synthetic linear, optionally drifting, and the
image-classification bandit), the two-cluster 1-D regression set used
for in-between-uncertainty probes, and standard Bayesian-optimization
test functions under a maximization convention.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .net import FlatParams, NetworkSpec, forward, init_params

__all__ = [
    "DatasetExhausted",
    "SyntheticBandit",
    "MnistBandit",
    "bandit_context",
    "bandit_reward",
    "BoFunction",
    "ackley",
    "branin",
    "hartmann6",
    "drawnn",
    "bo_eval",
    "load_mnist_idx",
    "mnist_paths",
    "resolve_data_dir",
    "inbetween_dataset",
]


class DatasetExhausted(Exception):
    """Raised when a streaming environment runs out of examples."""


class SyntheticBandit:
    """Linear contextual bandit with per-arm weight vectors.

    Rewards are w_a^T x + noise; contexts are standard normal.  With
    ``drift_std`` > 0 the weights take a Gaussian random-walk step at
    every context draw (the non-stationary variant); at 0 no drift draws
    are consumed, so the trace is identical to the stationary bandit
    under the same rng.

    ``reward`` returns (realized reward, best-arm reward) with the noise
    realization shared between the two, so per-step regret is the
    nonnegative mean gap.
    """

    def __init__(self, n_arms: int, context_dim: int, noise_std: float,
                 rng: np.random.Generator, drift_std: float = 0.0):
        if n_arms < 1 or context_dim < 1:
            raise ValueError("need at least one arm and one context dim")
        if noise_std < 0 or drift_std < 0:
            raise ValueError("noise/drift std must be nonnegative")
        self.n_arms = n_arms
        self.context_dim = context_dim
        self.noise_std = noise_std
        self.drift_std = drift_std
        self._rng = rng
        self.weights = rng.standard_normal((n_arms, context_dim)) / np.sqrt(
            context_dim
        )

    def context(self) -> np.ndarray:
        if self.drift_std > 0:
            self.weights = self.weights + self.drift_std * self._rng.standard_normal(
                self.weights.shape
            )
        return self._rng.standard_normal(self.context_dim)

    def reward(self, context: np.ndarray, action: int) -> tuple[float, float]:
        if not 0 <= action < self.n_arms:
            raise ValueError("action outside the arm set")
        means = self.weights @ context
        e = self.noise_std * self._rng.standard_normal() if self.noise_std > 0 else 0.0
        return float(means[action] + e), float(means.max() + e)


class MnistBandit:
    """Classification bandit over a fixed image/label stream.

    Context is one flattened image in [0,1]; the ten arms are class
    guesses; reward is 1 for the correct class, else 0 (so the best-arm
    reward is always 1 and cumulative regret is t minus total reward).
    Raises DatasetExhausted past the last example.
    """

    n_arms = 10

    def __init__(self, images: np.ndarray, labels: np.ndarray,
                 rng: np.random.Generator | None = None):
        if images.shape[0] != labels.shape[0]:
            raise ValueError("image/label counts differ")
        if rng is not None:
            order = rng.permutation(images.shape[0])
            images, labels = images[order], labels[order]
        self._images = images
        self._labels = labels
        self._cursor = -1

    def context(self) -> np.ndarray:
        if self._cursor + 1 >= self._images.shape[0]:
            raise DatasetExhausted("image stream exhausted")
        self._cursor += 1
        return self._images[self._cursor]

    @property
    def current_label(self) -> int:
        return int(self._labels[self._cursor])

    def reward(self, context: np.ndarray, action: int) -> tuple[float, float]:
        if not 0 <= action < self.n_arms:
            raise ValueError("action outside the arm set")
        return (1.0 if action == self.current_label else 0.0), 1.0


def bandit_context(env) -> np.ndarray:
    return env.context()


def bandit_reward(env, context, action) -> tuple[float, float]:
    return env.reward(context, action)


# ---------------------------------------------------------------------------
# Bayesian-optimization test functions (unit-box inputs, maximization)


@dataclass(frozen=True)
class BoFunction:
    name: str  # ackley | branin | hartmann6 | drawnn
    dim: int
    seed: int = 0  # drawnn weight seed; ignored elsewhere


def ackley(dim: int) -> BoFunction:
    return BoFunction(name="ackley", dim=dim)


def branin() -> BoFunction:
    return BoFunction(name="branin", dim=2)


def hartmann6() -> BoFunction:
    return BoFunction(name="hartmann6", dim=6)


def drawnn(dim: int, seed: int = 0) -> BoFunction:
    return BoFunction(name="drawnn", dim=dim, seed=seed)


_HARTMANN_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_HARTMANN_P = 1e-4 * np.array(
    [
        [1312, 1696, 5569, 124, 8283, 5886],
        [2329, 4135, 8307, 3736, 1004, 9991],
        [2348, 1451, 3522, 2883, 3047, 6650],
        [4047, 8828, 8732, 5743, 1091, 381],
    ]
)

_DRAWNN_CACHE: dict[tuple[int, int], tuple[NetworkSpec, FlatParams]] = {}


def _drawnn_net(dim: int, seed: int) -> tuple[NetworkSpec, FlatParams]:
    key = (dim, seed)
    if key not in _DRAWNN_CACHE:
        spec = NetworkSpec(input_dim=dim, hidden_widths=(64, 64),
                           output_dim=1, activation="tanh")
        _DRAWNN_CACHE[key] = (spec, init_params(spec, seed))
    return _DRAWNN_CACHE[key]


def bo_eval(f: BoFunction, x: np.ndarray) -> float:
    """Evaluate a test function at a unit-box point (maximization sign)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.size != f.dim:
        raise ValueError(f"{f.name} expects {f.dim} dims, got {x.size}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("query point outside the unit box")
    if f.name == "ackley":
        z = -32.768 + 65.536 * x
        a, b, c = 20.0, 0.2, 2.0 * np.pi
        val = (
            -a * np.exp(-b * np.sqrt(np.mean(z**2)))
            - np.exp(np.mean(np.cos(c * z)))
            + a
            + np.e
        )
        return float(-val)
    if f.name == "branin":
        z1 = -5.0 + 15.0 * x[0]
        z2 = 15.0 * x[1]
        b = 5.1 / (4.0 * np.pi**2)
        c = 5.0 / np.pi
        t = 1.0 / (8.0 * np.pi)
        val = (z2 - b * z1**2 + c * z1 - 6.0) ** 2 + 10.0 * (1.0 - t) * np.cos(
            z1
        ) + 10.0
        return float(-val)
    if f.name == "hartmann6":
        inner = np.sum(_HARTMANN_A * (x[None, :] - _HARTMANN_P) ** 2, axis=1)
        return float(np.sum(_HARTMANN_ALPHA * np.exp(-inner)))
    if f.name == "drawnn":
        spec, params = _drawnn_net(f.dim, f.seed)
        return float(forward(spec, params, x)[0])
    raise ValueError(f"unknown test function {f.name!r}")


# ---------------------------------------------------------------------------
# datasets


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ValueError(f"IDX file truncated while reading {what}")
    return data


def load_mnist_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Parse the classic IDX image/label pair.

    Returns (images, labels): images n x 784 float64 scaled to [0,1],
    labels n int64.  Malformed input raises ValueError naming the field
    that failed.
    """
    with open(images_path, "rb") as fh:
        magic, count, rows, cols = struct.unpack(
            ">IIII", _read_exact(fh, 16, "images header")
        )
        if magic != 0x00000803:
            raise ValueError(f"bad images magic 0x{magic:08x}")
        if rows != 28 or cols != 28:
            raise ValueError(f"unexpected image shape {rows}x{cols}")
        raw = _read_exact(fh, count * rows * cols, "images data")
    images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows * cols)
    with open(labels_path, "rb") as fh:
        magic, label_count = struct.unpack(
            ">II", _read_exact(fh, 8, "labels header")
        )
        if magic != 0x00000801:
            raise ValueError(f"bad labels magic 0x{magic:08x}")
        raw = _read_exact(fh, label_count, "labels data")
    labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    if label_count != count:
        raise ValueError(
            f"count mismatch: {count} images vs {label_count} labels"
        )
    if labels.size and labels.max() > 9:
        raise ValueError("label value outside 0-9")
    return images.astype(np.float64) / 255.0, labels


def resolve_data_dir(cli_value: str | None = None) -> Path:
    """CLI flag wins, then PREDFILT_DATA_DIR, then ./data."""
    if cli_value:
        return Path(cli_value)
    env = os.environ.get("PREDFILT_DATA_DIR")
    return Path(env) if env else Path("data")


def mnist_paths(data_dir) -> tuple[Path, Path]:
    """Locate the training IDX pair; raises FileNotFoundError listing gaps."""
    data_dir = Path(data_dir)
    images = data_dir / "train-images-idx3-ubyte"
    labels = data_dir / "train-labels-idx1-ubyte"
    missing = [str(p) for p in (images, labels) if not p.is_file()]
    if missing:
        raise FileNotFoundError(
            "missing dataset file(s): " + ", ".join(missing)
        )
    return images, labels


def inbetween_dataset(seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two clusters of 60 noisy sin(2x) + 0.2x points with a gap at 0."""
    rng = np.random.default_rng(seed)
    left = rng.uniform(-3.2, -1.2, size=60)
    right = rng.uniform(1.2, 3.2, size=60)
    xs = np.concatenate([left, right])
    ys = np.sin(2.0 * xs) + 0.2 * xs + rng.normal(0.0, 0.1, size=xs.size)
    return xs, ys
