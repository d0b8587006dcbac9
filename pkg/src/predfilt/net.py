"""Small MLPs with an explicit hidden/last-layer parameter partition.

The flat parameter vector is laid out layer-major, weights before bias:
all hidden layers first (the ``omega`` block), then the output layer
including its bias (the ``eta`` block).  Filters only ever see the flat
vector, the split index, and the two Jacobian blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NetworkSpec",
    "FlatParams",
    "JacobianPair",
    "param_counts",
    "init_params",
    "forward",
    "forward_batch",
    "jacobians",
    "jvp_params",
    "elu",
]

_ACTIVATIONS = ("elu", "tanh", "relu")


def elu(z):
    """Exponential linear unit: z for z >= 0, exp(z) - 1 below."""
    z = np.asarray(z, dtype=np.float64)
    out = np.where(z >= 0, z, np.expm1(np.minimum(z, 0.0)))
    return out if out.ndim else float(out)


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "elu":
        return np.where(z >= 0, z, np.expm1(np.minimum(z, 0.0)))
    if name == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _act_deriv(name: str, z: np.ndarray) -> np.ndarray:
    if name == "elu":
        return np.where(z >= 0, 1.0, np.exp(np.minimum(z, 0.0)))
    if name == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return (z > 0).astype(np.float64)


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture of an MLP: input width, hidden widths, output width."""

    input_dim: int
    hidden_widths: tuple[int, ...]
    output_dim: int
    activation: str = "elu"

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input and output dims must be >= 1")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError("hidden widths must be >= 1")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def layer_sizes(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per layer, hidden layers then output layer."""
        widths = [self.input_dim, *self.hidden_widths, self.output_dim]
        return list(zip(widths[:-1], widths[1:]))


def param_counts(spec: NetworkSpec) -> tuple[int, int]:
    """(hidden-block size D_omega, last-layer size D_eta)."""
    sizes = spec.layer_sizes
    hidden = sum(fi * fo + fo for fi, fo in sizes[:-1])
    fi, fo = sizes[-1]
    return hidden, fi * fo + fo


@dataclass(frozen=True)
class FlatParams:
    """Flat parameter vector; theta[:split] is the hidden block."""

    theta: np.ndarray
    split: int

    @property
    def hidden(self) -> np.ndarray:
        return self.theta[: self.split]

    @property
    def last(self) -> np.ndarray:
        return self.theta[self.split :]

    def replace_blocks(self, hidden: np.ndarray, last: np.ndarray) -> "FlatParams":
        return FlatParams(np.concatenate([hidden, last]), self.split)


@dataclass(frozen=True)
class JacobianPair:
    """Output Jacobians w.r.t. the last-layer and hidden blocks."""

    l_tilde: np.ndarray  # D_y x D_eta
    h_tilde: np.ndarray  # D_y x D_omega

    @property
    def full(self) -> np.ndarray:
        """D_y x D_theta Jacobian in flat layout (hidden block first)."""
        return np.hstack([self.h_tilde, self.l_tilde])


def init_params(spec: NetworkSpec, seed: int) -> FlatParams:
    """Weights ~ N(0, 1/fan_in), biases zero; deterministic per seed."""
    rng = np.random.default_rng(seed)
    chunks = []
    for fan_in, fan_out in spec.layer_sizes:
        w = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_out, fan_in))
        chunks.append(w.ravel())
        chunks.append(np.zeros(fan_out))
    theta = np.concatenate(chunks)
    hidden_size, _ = param_counts(spec)
    return FlatParams(theta, hidden_size)


def _unpack(spec: NetworkSpec, params: FlatParams):
    """Views (no copies) of (W, b) per layer from the flat vector."""
    theta = params.theta
    layers = []
    pos = 0
    for fan_in, fan_out in spec.layer_sizes:
        w = theta[pos : pos + fan_in * fan_out].reshape(fan_out, fan_in)
        pos += fan_in * fan_out
        b = theta[pos : pos + fan_out]
        pos += fan_out
        layers.append((w, b))
    if pos != theta.size:
        raise ValueError(
            f"parameter vector has {theta.size} entries, spec needs {pos}"
        )
    return layers


def forward(spec: NetworkSpec, params: FlatParams, x: np.ndarray) -> np.ndarray:
    """Evaluate the network at a single input; returns a D_y vector."""
    layers = _unpack(spec, params)
    a = np.asarray(x, dtype=np.float64)
    for w, b in layers[:-1]:
        a = _act(spec.activation, w @ a + b)
    w, b = layers[-1]
    return w @ a + b


def forward_batch(spec: NetworkSpec, params: FlatParams, xs: np.ndarray) -> np.ndarray:
    """Evaluate the network at n inputs at once; returns n x D_y."""
    layers = _unpack(spec, params)
    a = np.asarray(xs, dtype=np.float64)
    for w, b in layers[:-1]:
        a = _act(spec.activation, a @ w.T + b)
    w, b = layers[-1]
    return a @ w.T + b


def jacobians(spec: NetworkSpec, params: FlatParams, x: np.ndarray) -> JacobianPair:
    """Exact Jacobians of the output w.r.t. the two parameter blocks.

    Layerwise backprop, one row group per output: for output i,
    d y_i / d W_l = delta_{l,i} outer a_{l-1} with delta backpropagated
    through the activations.  No finite differences anywhere.
    """
    layers = _unpack(spec, params)
    act = spec.activation

    a = np.asarray(x, dtype=np.float64)
    acts = [a]  # post-activation signals, acts[l] feeds layer l
    pres = []  # pre-activation signals of hidden layers
    for w, b in layers[:-1]:
        z = w @ a + b
        pres.append(z)
        a = _act(act, z)
        acts.append(a)

    d_y = spec.output_dim
    w_last, _ = layers[-1]
    feats = acts[-1]
    # Last layer is affine in eta: d y_i / d W_kj = delta_ik * feats_j.
    l_tilde = np.hstack([np.kron(np.eye(d_y), feats), np.eye(d_y)])

    # delta[i, :] = d y_i / d (post-activation of current hidden layer)
    delta = w_last.copy()
    hidden_parts = [None] * (len(layers) - 1)
    for l in range(len(layers) - 2, -1, -1):
        w_l, _ = layers[l]
        dz = delta * _act_deriv(act, pres[l])  # D_y x n_l
        grad_w = dz[:, :, None] * acts[l][None, None, :]  # D_y x n_l x n_{l-1}
        hidden_parts[l] = np.hstack([grad_w.reshape(d_y, -1), dz])
        delta = dz @ w_l

    h_tilde = (
        np.hstack(hidden_parts) if hidden_parts else np.zeros((d_y, 0))
    )
    return JacobianPair(l_tilde=l_tilde, h_tilde=h_tilde)


def jvp_params(
    spec: NetworkSpec,
    params: FlatParams,
    delta: np.ndarray,
    xs: np.ndarray,
) -> np.ndarray:
    """J(x) @ delta for a batch of inputs in one forward-mode pass.

    Exact directional derivative of the output in the parameter direction
    ``delta`` (flat layout), evaluated at every row of ``xs``; returns
    n x D_y.  Used to evaluate sampled functions f(mean, x) + J(x) delta
    over candidate sets without materializing any Jacobian.
    """
    layers = _unpack(spec, params)
    dlayers = _unpack(spec, FlatParams(np.asarray(delta, dtype=np.float64), params.split))
    a = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    da = np.zeros_like(a)
    for (w, b), (dw, db) in zip(layers[:-1], dlayers[:-1]):
        z = a @ w.T + b
        dz = da @ w.T + a @ dw.T + db
        a = _act(spec.activation, z)
        da = _act_deriv(spec.activation, z) * dz
    (w, b), (dw, db) = layers[-1], dlayers[-1]
    return da @ w.T + a @ dw.T + db
