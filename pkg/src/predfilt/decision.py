"""Action selection on top of closed-form posterior predictives.

Policies never build anything larger than the outcome dimension per
action: predictive sampling draws from the K marginal predictives,
Thompson sampling reuses one coherent parameter draw across all
candidate actions, and epsilon-greedy touches only predictive means.

Discrete action sets come in two flavors.  With per-arm feature vectors
the network is scalar-output and sees concat(context, features[arm]).
With ``features=None`` the arms index the network's output coordinates
(one output per arm), which is how the image bandit is wired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .filters import GaussianPredictive, NoiseConfig, predictive, sample_function
from .net import FlatParams, NetworkSpec, forward, forward_batch, jvp_params, param_counts

__all__ = [
    "DiscreteActions",
    "BoxDomain",
    "predictive_sample_action",
    "thompson_sample_action",
    "epsilon_greedy_action",
    "expected_improvement",
    "bo_propose",
    "lowdisc_candidates",
]


@dataclass(frozen=True)
class DiscreteActions:
    """K arms, optionally with feature vectors (K x D_a)."""

    n_actions: int
    features: np.ndarray | None = None

    def __post_init__(self):
        if self.n_actions < 1:
            raise ValueError("action set must be nonempty")
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != self.n_actions:
                raise ValueError("features must be n_actions x D_a")
            object.__setattr__(self, "features", feats)

    @classmethod
    def from_features(cls, features) -> "DiscreteActions":
        features = np.asarray(features, dtype=np.float64)
        return cls(n_actions=features.shape[0], features=features)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box with a default candidate budget for BO."""

    lower: np.ndarray
    upper: np.ndarray
    candidate_count: int = 512

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower/upper must be 1-D and congruent")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("box bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError("need lower < upper in every dimension")
        if self.candidate_count < 1:
            raise ValueError("candidate_count must be positive")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size


def _mean_params(belief, spec: NetworkSpec) -> FlatParams:
    from .filters import _flat_mean

    split, _ = param_counts(spec)
    return _flat_mean(belief, split)


def _arm_inputs(context, actions: DiscreteActions, spec: NetworkSpec) -> np.ndarray:
    context = np.atleast_1d(np.asarray(context, dtype=np.float64))
    if actions.features is None:
        if spec.output_dim != actions.n_actions:
            raise ValueError(
                "coordinate arms need one network output per action"
            )
        return context[None, :]
    if spec.output_dim != 1:
        raise ValueError("feature-vector arms need a scalar-output network")
    return np.hstack(
        [np.broadcast_to(context, (actions.n_actions, context.size)),
         actions.features]
    )


def predictive_sample_action(belief, spec: NetworkSpec, context,
                             actions: DiscreteActions, noise: NoiseConfig,
                             rng: np.random.Generator,
                             pred: GaussianPredictive | None = None,
                             ) -> tuple[int, np.ndarray]:
    """One draw from each arm's posterior predictive; argmax wins.

    Draws are independent across arms (marginals, not a joint draw) and
    include aleatoric noise.  Returns (action index, all K samples); ties
    break toward the lowest index.  In coordinate-arm mode a caller that
    already formed the predictive at ``context`` can pass it as ``pred``;
    selection then touches nothing larger than the K marginals.
    """
    z = rng.standard_normal(actions.n_actions)
    if actions.features is None:
        if pred is None:
            pred = predictive(belief, spec,
                              np.asarray(context, dtype=np.float64), noise)
        samples = pred.mean + pred.marginal_std() * z
    else:
        if pred is not None:
            raise ValueError("precomputed predictive only applies to "
                             "coordinate arms")
        xs = _arm_inputs(context, actions, spec)
        samples = np.empty(actions.n_actions)
        for i, x in enumerate(xs):
            arm_pred = predictive(belief, spec, x, noise)
            samples[i] = arm_pred.mean[0] + arm_pred.marginal_std()[0] * z[i]
    return int(np.argmax(samples)), samples


def thompson_sample_action(belief, spec: NetworkSpec, context,
                           actions: DiscreteActions,
                           rng: np.random.Generator) -> int:
    """One coherent function draw, evaluated at every arm; argmax wins."""
    delta = sample_function(belief, spec, rng)
    params = _mean_params(belief, spec)
    xs = _arm_inputs(context, actions, spec)
    values = forward_batch(spec, params, xs) + jvp_params(spec, params, delta, xs)
    if actions.features is None:
        values = values[0]
    else:
        values = values[:, 0]
    return int(np.argmax(values))


def epsilon_greedy_action(belief, spec: NetworkSpec, context,
                          actions: DiscreteActions, epsilon: float,
                          rng: np.random.Generator) -> int:
    """Uniform arm with probability epsilon, else argmax of the means."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(actions.n_actions))
    params = _mean_params(belief, spec)
    xs = _arm_inputs(context, actions, spec)
    values = forward_batch(spec, params, xs)
    values = values[0] if actions.features is None else values[:, 0]
    return int(np.argmax(values))


def expected_improvement(pred: GaussianPredictive, best_so_far: float) -> float:
    """Closed-form Gaussian EI for a scalar predictive (maximization)."""
    mu = float(pred.mean[0])
    sigma = float(pred.marginal_std()[0])
    gap = mu - float(best_so_far)
    if sigma == 0.0:
        return max(gap, 0.0)
    z = gap / sigma
    return max(float(gap * norm.cdf(z) + sigma * norm.pdf(z)), 0.0)


_PRIME_LIMIT = 64


def _first_primes(k: int) -> list[int]:
    primes: list[int] = []
    n = 2
    while len(primes) < k:
        if all(n % p for p in primes):
            primes.append(n)
        n += 1
    return primes


_PRIMES = _first_primes(_PRIME_LIMIT)


def _radical_inverse(index: int, base: int) -> float:
    inv = 0.0
    scale = 1.0 / base
    while index > 0:
        index, digit = divmod(index, base)
        inv += digit * scale
        scale /= base
    return inv


def lowdisc_candidates(box: BoxDomain, n: int, seed: int) -> np.ndarray:
    """Halton points in the box: dimension j uses the j-th prime base.

    ``seed`` offsets the start of the sequence (point i is radical-inverse
    index seed + 1 + i), so seed 0 in 1-D yields 1/2, 1/4, 3/4, 1/8, ...
    Deterministic; dimensions above 64 are unsupported.
    """
    if n < 1:
        raise ValueError("need at least one candidate")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    if box.dim > _PRIME_LIMIT:
        raise ValueError(
            f"Halton candidate generation supports at most {_PRIME_LIMIT} "
            f"dimensions, got {box.dim}"
        )
    unit = np.empty((n, box.dim))
    for j in range(box.dim):
        base = _PRIMES[j]
        unit[:, j] = [
            _radical_inverse(seed + 1 + i, base) for i in range(n)
        ]
    return box.lower + unit * (box.upper - box.lower)


def _sampled_values(spec, params, delta, xs):
    return (
        forward_batch(spec, params, xs)[:, 0]
        + jvp_params(spec, params, delta, xs)[:, 0]
    )


def _refine_ascent(spec, params, delta, x0, box: BoxDomain,
                   n_steps: int = 50, step_size: float = 0.01) -> np.ndarray:
    """Projected finite-difference ascent on the drawn linearized function.

    Fixed step count and size; every iterate is clipped back into the box.
    """
    width = box.upper - box.lower
    h = 1e-6 * width
    x = x0.copy()
    for _ in range(n_steps):
        probes = np.repeat(x[None, :], 2 * box.dim, axis=0)
        for j in range(box.dim):
            probes[2 * j, j] += h[j]
            probes[2 * j + 1, j] -= h[j]
        vals = _sampled_values(spec, params, delta, probes)
        grad = (vals[0::2] - vals[1::2]) / (2.0 * h)
        x = np.clip(x + step_size * grad, box.lower, box.upper)
    return x


def bo_propose(belief, spec: NetworkSpec, actions: BoxDomain, strategy: str,
               rng: np.random.Generator, noise: NoiseConfig | None = None,
               best_so_far: float | None = None,
               candidates: np.ndarray | None = None,
               refine: bool = False) -> np.ndarray:
    """Pick the next query point over a low-discrepancy candidate set.

    strategy "ts": one coherent draw, argmax over candidates, optional
    projected-gradient refinement of the winner on the same draw.
    strategy "ei": argmax of expected improvement against ``best_so_far``
    (required), using the closed-form predictive at each candidate.
    A fixed ``candidates`` array overrides generation (the benchmark
    holds one set fixed across a run); otherwise a fresh seed is drawn
    from ``rng``.
    """
    if spec.output_dim != 1:
        raise ValueError("BO requires a scalar-output network")
    if candidates is None:
        seed = int(rng.integers(2**31 - 1))
        candidates = lowdisc_candidates(box=actions, n=actions.candidate_count,
                                        seed=seed)
    else:
        candidates = np.asarray(candidates, dtype=np.float64)
    strategy = strategy.lower()
    params = _mean_params(belief, spec)
    if strategy == "ts":
        delta = sample_function(belief, spec, rng)
        values = _sampled_values(spec, params, delta, candidates)
        x = candidates[int(np.argmax(values))]
        if refine:
            x = _refine_ascent(spec, params, delta, x, actions)
        return x
    if strategy == "ei":
        if best_so_far is None:
            raise ValueError("EI needs best_so_far")
        if noise is None:
            noise = NoiseConfig.from_scalars(d_y=1)
        scores = np.empty(candidates.shape[0])
        for i, x in enumerate(candidates):
            scores[i] = expected_improvement(
                predictive(belief, spec, x, noise), best_so_far
            )
        return candidates[int(np.argmax(scores))]
    raise ValueError(f"unknown strategy {strategy!r}")
