"""Square-root Kalman recursions for online neural-net learning.

Four filters over the same linearized observation model
``y = f(theta_prev, x) + J (theta - theta_prev) + e``:

* dense      -- exact Joseph-form EKF on the full D_theta covariance (oracle);
* lrkf       -- one low-rank factor W (d x D_theta) over all parameters;
* hilofi     -- full-rank Cholesky factor on the last layer, low-rank factor
                on the hidden block;
* lolofi     -- low-rank factors on both blocks.

All beliefs are immutable; every step returns a new belief.  Gains and
factor updates for the low-rank filters never materialize a
D_theta x D_theta matrix.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .linalg import lowrank_project_inflated, qr_stack, tri_solve_gram
from .net import (
    FlatParams,
    JacobianPair,
    NetworkSpec,
    forward,
    jacobians,
    param_counts,
)

__all__ = [
    "NoiseConfig",
    "DenseBelief",
    "LrkfBelief",
    "HiLoFiBelief",
    "LoLoFiBelief",
    "GaussianPredictive",
    "UpdateGains",
    "init_dense",
    "init_lrkf",
    "init_hilofi",
    "init_lolofi",
    "dense_predict_update",
    "lrkf_step",
    "hilofi_step",
    "lolofi_step",
    "update_obs",
    "predictive",
    "sample_function",
    "moment_matched_obs",
    "classification_step",
    "softmax",
    "save_belief",
    "load_belief",
    "spec_hash",
]


@dataclass(frozen=True)
class NoiseConfig:
    """Dynamics/observation noise: R^{1/2} plus isotropic drift variances."""

    r_half: np.ndarray  # D_y x D_y upper-triangular, zero allowed
    q_last: float = 0.0
    q_hidden: float = 0.0

    def __post_init__(self):
        if self.q_last < 0 or self.q_hidden < 0:
            raise ValueError("drift variances must be nonnegative")

    @classmethod
    def from_scalars(cls, d_y: int, r: float = 0.0, q_last: float = 0.0,
                     q_hidden: float = 0.0) -> "NoiseConfig":
        """Isotropic observation noise with standard deviation ``r``."""
        return cls(r_half=r * np.eye(d_y), q_last=q_last, q_hidden=q_hidden)

    def slice_output(self, idx: int) -> "NoiseConfig":
        """Noise config for observing a single output coordinate."""
        return NoiseConfig(
            r_half=self.r_half[idx : idx + 1, idx : idx + 1].copy(),
            q_last=self.q_last,
            q_hidden=self.q_hidden,
        )


@dataclass(frozen=True)
class DenseBelief:
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True)
class LrkfBelief:
    mean: np.ndarray
    w: np.ndarray  # d x D_theta


@dataclass(frozen=True)
class HiLoFiBelief:
    mean_last: np.ndarray
    mean_hidden: np.ndarray
    sigma_last_half: np.ndarray  # D_eta x D_eta upper-triangular
    c_hidden: np.ndarray  # d_omega x D_omega


@dataclass(frozen=True)
class LoLoFiBelief:
    mean_last: np.ndarray
    mean_hidden: np.ndarray
    c_last: np.ndarray  # d_eta x D_eta
    c_hidden: np.ndarray  # d_omega x D_omega


@dataclass(frozen=True)
class UpdateGains:
    """Transposed Kalman gains from one update (D_y x block size)."""

    k_last_t: np.ndarray
    k_hidden_t: np.ndarray


@dataclass(frozen=True)
class GaussianPredictive:
    """One-step-ahead predictive: mean plus epistemic/aleatoric covariances."""

    mean: np.ndarray
    epistemic: np.ndarray
    aleatoric: np.ndarray

    @property
    def cov(self) -> np.ndarray:
        return self.epistemic + self.aleatoric

    def marginal_std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


# ---------------------------------------------------------------------------
# initialization


def _flat_mean(belief, split: int) -> FlatParams:
    if isinstance(belief, (DenseBelief, LrkfBelief)):
        return FlatParams(belief.mean, split)
    return FlatParams(
        np.concatenate([belief.mean_hidden, belief.mean_last]), split
    )


def init_dense(spec: NetworkSpec, params: FlatParams,
               prior_var_last: float, prior_var_hidden: float) -> DenseBelief:
    d_hidden, d_last = param_counts(spec)
    diag = np.concatenate(
        [np.full(d_hidden, prior_var_hidden), np.full(d_last, prior_var_last)]
    )
    return DenseBelief(mean=params.theta.copy(), cov=np.diag(diag))


def init_lrkf(spec: NetworkSpec, params: FlatParams,
              prior_var: float, rank: int) -> LrkfBelief:
    d_theta = params.theta.size
    if not 1 <= rank <= d_theta:
        raise ValueError("rank out of range")
    w = np.zeros((rank, d_theta))
    w[:, :rank] = np.sqrt(prior_var) * np.eye(rank)
    return LrkfBelief(mean=params.theta.copy(), w=w)


def init_hilofi(spec: NetworkSpec, params: FlatParams,
                prior_var_last: float, prior_var_hidden: float,
                rank_hidden: int) -> HiLoFiBelief:
    d_hidden, d_last = param_counts(spec)
    # rank 0 only for nets without hidden layers (empty omega block)
    if not (1 <= rank_hidden <= d_hidden or rank_hidden == d_hidden == 0):
        raise ValueError("hidden rank out of range")
    c = np.zeros((rank_hidden, d_hidden))
    c[:, :rank_hidden] = np.sqrt(prior_var_hidden) * np.eye(rank_hidden)
    return HiLoFiBelief(
        mean_last=params.last.copy(),
        mean_hidden=params.hidden.copy(),
        sigma_last_half=np.sqrt(prior_var_last) * np.eye(d_last),
        c_hidden=c,
    )


def init_lolofi(spec: NetworkSpec, params: FlatParams,
                prior_var_last: float, prior_var_hidden: float,
                rank_last: int, rank_hidden: int) -> LoLoFiBelief:
    d_hidden, d_last = param_counts(spec)
    if not (1 <= rank_hidden <= d_hidden or rank_hidden == d_hidden == 0):
        raise ValueError("rank out of range")
    if not 1 <= rank_last <= d_last:
        raise ValueError("rank out of range")
    c_h = np.zeros((rank_hidden, d_hidden))
    c_h[:, :rank_hidden] = np.sqrt(prior_var_hidden) * np.eye(rank_hidden)
    c_l = np.zeros((rank_last, d_last))
    c_l[:, :rank_last] = np.sqrt(prior_var_last) * np.eye(rank_last)
    return LoLoFiBelief(
        mean_last=params.last.copy(),
        mean_hidden=params.hidden.copy(),
        c_last=c_l,
        c_hidden=c_h,
    )


# ---------------------------------------------------------------------------
# update cores (innovation + Jacobian blocks in, new belief out)


def _dense_update(belief: DenseBelief, eps: np.ndarray, jac: np.ndarray,
                  noise: NoiseConfig, split: int, return_gains: bool = False):
    d_theta = belief.mean.size
    q_diag = np.concatenate(
        [
            np.full(split, noise.q_hidden),
            np.full(d_theta - split, noise.q_last),
        ]
    )
    cov_pred = belief.cov + np.diag(q_diag)
    r = noise.r_half.T @ noise.r_half
    s = jac @ cov_pred @ jac.T + r
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "singular innovation covariance"
        ) from exc
    # K = cov_pred J^T S^{-1}, via the Cholesky of S
    kt = np.linalg.solve(
        chol.T, np.linalg.solve(chol, jac @ cov_pred)
    )  # D_y x D_theta
    mean = belief.mean + kt.T @ eps
    ikj = np.eye(d_theta) - kt.T @ jac
    cov = ikj @ cov_pred @ ikj.T + kt.T @ r @ kt
    new = DenseBelief(mean=mean, cov=0.5 * (cov + cov.T))
    if return_gains:
        return new, UpdateGains(k_last_t=kt[:, split:], k_hidden_t=kt[:, :split])
    return new


def _lrkf_update(belief: LrkfBelief, eps: np.ndarray, jac: np.ndarray,
                 noise: NoiseConfig, inflate_factor: bool, split: int,
                 return_gains: bool = False):
    w = belief.w
    q = noise.q_hidden  # one drift variance across all of theta
    blocks = [w @ jac.T]
    if q > 0:
        blocks.append(np.sqrt(q) * jac.T)
    blocks.append(noise.r_half)
    s_half = qr_stack(blocks)
    v = tri_solve_gram(s_half, jac)  # D_y x D_theta
    kt = (v @ w.T) @ w
    if q > 0:
        kt = kt + q * v
    mean = belief.mean + kt.T @ eps
    a_cols = [w - (w @ jac.T) @ kt, noise.r_half @ kt]
    w_new = lowrank_project_inflated(
        a_cols, w.shape[0], q if inflate_factor else 0.0
    )
    new = LrkfBelief(mean=mean, w=w_new)
    if return_gains:
        return new, UpdateGains(k_last_t=kt[:, split:], k_hidden_t=kt[:, :split])
    return new


def _hilofi_update(belief: HiLoFiBelief, eps: np.ndarray,
                   l_tilde: np.ndarray, h_tilde: np.ndarray,
                   noise: NoiseConfig, return_gains: bool = False):
    sl = belief.sigma_last_half
    c = belief.c_hidden
    q_l, q_h = noise.q_last, noise.q_hidden

    blocks = [sl @ l_tilde.T]
    if q_l > 0:
        blocks.append(np.sqrt(q_l) * l_tilde.T)
    blocks.append(c @ h_tilde.T)
    if q_h > 0:
        blocks.append(np.sqrt(q_h) * h_tilde.T)
    blocks.append(noise.r_half)
    s_half = qr_stack(blocks)

    v_h = tri_solve_gram(s_half, h_tilde)  # D_y x D_omega
    k_ht = (v_h @ c.T) @ c
    if q_h > 0:
        k_ht = k_ht + q_h * v_h
    v_l = tri_solve_gram(s_half, l_tilde)  # D_y x D_eta
    # Gain against the prior factor; the q_eta inflation enters additively.
    k_lt = (v_l @ sl.T) @ sl
    if q_l > 0:
        k_lt = k_lt + q_l * v_l

    mean_hidden = belief.mean_hidden + k_ht.T @ eps
    mean_last = belief.mean_last + k_lt.T @ eps

    sigma_new = qr_stack(
        [sl - (sl @ l_tilde.T) @ k_lt, noise.r_half @ k_lt]
    )
    if c.shape[0]:
        c_new = lowrank_project_inflated(
            [c - (c @ h_tilde.T) @ k_ht, noise.r_half @ k_ht],
            c.shape[0],
            q_h,
        )
    else:  # empty hidden block (net without hidden layers)
        c_new = c
    new = HiLoFiBelief(
        mean_last=mean_last,
        mean_hidden=mean_hidden,
        sigma_last_half=sigma_new,
        c_hidden=c_new,
    )
    if return_gains:
        return new, UpdateGains(k_last_t=k_lt, k_hidden_t=k_ht)
    return new


def _lolofi_update(belief: LoLoFiBelief, eps: np.ndarray,
                   l_tilde: np.ndarray, h_tilde: np.ndarray,
                   noise: NoiseConfig, return_gains: bool = False):
    cl = belief.c_last
    ch = belief.c_hidden
    q_l, q_h = noise.q_last, noise.q_hidden

    blocks = [cl @ l_tilde.T]
    if q_l > 0:
        blocks.append(np.sqrt(q_l) * l_tilde.T)
    blocks.append(ch @ h_tilde.T)
    if q_h > 0:
        blocks.append(np.sqrt(q_h) * h_tilde.T)
    blocks.append(noise.r_half)
    s_half = qr_stack(blocks)

    v_h = tri_solve_gram(s_half, h_tilde)
    k_ht = (v_h @ ch.T) @ ch
    if q_h > 0:
        k_ht = k_ht + q_h * v_h
    v_l = tri_solve_gram(s_half, l_tilde)
    k_lt = (v_l @ cl.T) @ cl
    if q_l > 0:
        k_lt = k_lt + q_l * v_l

    mean_hidden = belief.mean_hidden + k_ht.T @ eps
    mean_last = belief.mean_last + k_lt.T @ eps

    cl_new = lowrank_project_inflated(
        [cl - (cl @ l_tilde.T) @ k_lt, noise.r_half @ k_lt],
        cl.shape[0],
        q_l,
    )
    if ch.shape[0]:
        ch_new = lowrank_project_inflated(
            [ch - (ch @ h_tilde.T) @ k_ht, noise.r_half @ k_ht],
            ch.shape[0],
            q_h,
        )
    else:
        ch_new = ch
    new = LoLoFiBelief(
        mean_last=mean_last,
        mean_hidden=mean_hidden,
        c_last=cl_new,
        c_hidden=ch_new,
    )
    if return_gains:
        return new, UpdateGains(k_last_t=k_lt, k_hidden_t=k_ht)
    return new


def update_obs(belief, spec: NetworkSpec, eps: np.ndarray,
               l_tilde: np.ndarray, h_tilde: np.ndarray, noise: NoiseConfig,
               inflate_factor: bool = True, return_gains: bool = False):
    """One conditioning step from an explicit linearized observation.

    ``eps`` is the innovation (observation minus predicted mean) and
    ``l_tilde``/``h_tilde`` the observation Jacobians w.r.t. the two
    parameter blocks.  This is the entry point for partial observations
    (single bandit arm) and transformed observation models
    (moment-matched classification); the per-filter ``*_step`` functions
    wrap it for plain regression.

    ``inflate_factor`` only affects the low-rank joint filter; the
    non-inflated variant exists for ablation.  ``return_gains=True``
    additionally returns the transposed per-block gains (diagnostics).
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=np.float64))
    split, _ = param_counts(spec)
    if isinstance(belief, DenseBelief):
        jac = np.hstack([h_tilde, l_tilde])
        return _dense_update(belief, eps, jac, noise, split, return_gains)
    if isinstance(belief, LrkfBelief):
        jac = np.hstack([h_tilde, l_tilde])
        return _lrkf_update(belief, eps, jac, noise, inflate_factor, split,
                            return_gains)
    if isinstance(belief, HiLoFiBelief):
        return _hilofi_update(belief, eps, l_tilde, h_tilde, noise,
                              return_gains)
    if isinstance(belief, LoLoFiBelief):
        return _lolofi_update(belief, eps, l_tilde, h_tilde, noise,
                              return_gains)
    raise TypeError(f"unknown belief type {type(belief).__name__}")


def _regression_step(belief, spec, x, y, noise, **kw):
    split, _ = param_counts(spec)
    params = _flat_mean(belief, split)
    yhat = forward(spec, params, x)
    jac = jacobians(spec, params, x)
    eps = np.atleast_1d(np.asarray(y, dtype=np.float64)) - yhat
    return update_obs(belief, spec, eps, jac.l_tilde, jac.h_tilde, noise, **kw)


def dense_predict_update(belief: DenseBelief, spec: NetworkSpec, x, y,
                         noise: NoiseConfig) -> DenseBelief:
    """Joseph-form EKF step: the exact (quadratic-cost) reference filter."""
    return _regression_step(belief, spec, x, y, noise)


def lrkf_step(belief: LrkfBelief, spec: NetworkSpec, x, y,
              noise: NoiseConfig, inflate_factor: bool = True) -> LrkfBelief:
    """Low-rank joint filter step; ``q_hidden`` drives all of theta."""
    return _regression_step(belief, spec, x, y, noise,
                            inflate_factor=inflate_factor)


def hilofi_step(belief: HiLoFiBelief, spec: NetworkSpec, x, y,
                noise: NoiseConfig) -> HiLoFiBelief:
    """Full-rank last layer, low-rank hidden block."""
    return _regression_step(belief, spec, x, y, noise)


def lolofi_step(belief: LoLoFiBelief, spec: NetworkSpec, x, y,
                noise: NoiseConfig) -> LoLoFiBelief:
    """Low-rank factors on both parameter blocks."""
    return _regression_step(belief, spec, x, y, noise)


# ---------------------------------------------------------------------------
# posterior predictive


def predictive(belief, spec: NetworkSpec, x,
               noise: NoiseConfig, jac: JacobianPair | None = None) -> GaussianPredictive:
    """Closed-form Gaussian predictive at the current (post-update) belief.

    Epistemic part propagates the covariance factors through the Jacobians
    as small Gram products; aleatoric part is R.  No drift inflation here:
    the predictive conditions on the belief as it stands.  Pass ``jac``
    when the caller already linearized at the belief mean (it is not
    checked against ``x``).
    """
    split, _ = param_counts(spec)
    params = _flat_mean(belief, split)
    mean = forward(spec, params, x)
    if jac is None:
        jac = jacobians(spec, params, x)
    if isinstance(belief, DenseBelief):
        full = jac.full
        epi = full @ belief.cov @ full.T
    elif isinstance(belief, LrkfBelief):
        g = belief.w @ jac.full.T
        epi = g.T @ g
    elif isinstance(belief, HiLoFiBelief):
        g_l = belief.sigma_last_half @ jac.l_tilde.T
        g_h = belief.c_hidden @ jac.h_tilde.T
        epi = g_l.T @ g_l + g_h.T @ g_h
    elif isinstance(belief, LoLoFiBelief):
        g_l = belief.c_last @ jac.l_tilde.T
        g_h = belief.c_hidden @ jac.h_tilde.T
        epi = g_l.T @ g_l + g_h.T @ g_h
    else:
        raise TypeError(f"unknown belief type {type(belief).__name__}")
    epi = 0.5 * (epi + epi.T)
    return GaussianPredictive(
        mean=mean, epistemic=epi, aleatoric=noise.r_half.T @ noise.r_half
    )


def sample_function(belief, spec: NetworkSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one coherent parameter perturbation delta (flat layout).

    The induced function x -> forward(mean, x) + J(x) @ delta has the
    belief's epistemic predictive covariance at every x, jointly across
    inputs (one delta reused).  Hidden-block noise is drawn before
    last-layer noise.
    """
    if isinstance(belief, DenseBelief):
        w, u = np.linalg.eigh(belief.cov)
        z = rng.standard_normal(belief.mean.size)
        return (u * np.sqrt(np.clip(w, 0.0, None))) @ z
    if isinstance(belief, LrkfBelief):
        return belief.w.T @ rng.standard_normal(belief.w.shape[0])
    if isinstance(belief, HiLoFiBelief):
        d_hidden = belief.c_hidden.T @ rng.standard_normal(belief.c_hidden.shape[0])
        d_last = belief.sigma_last_half.T @ rng.standard_normal(belief.mean_last.size)
        return np.concatenate([d_hidden, d_last])
    if isinstance(belief, LoLoFiBelief):
        d_hidden = belief.c_hidden.T @ rng.standard_normal(belief.c_hidden.shape[0])
        d_last = belief.c_last.T @ rng.standard_normal(belief.c_last.shape[0])
        return np.concatenate([d_hidden, d_last])
    raise TypeError(f"unknown belief type {type(belief).__name__}")


# ---------------------------------------------------------------------------
# moment-matched classification


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - np.max(z))
    return e / e.sum()


def moment_matched_obs(logits: np.ndarray, eps: float,
                       literal_sign: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian observation moments matching a multinomial label model.

    Returns (m, cov) with m = softmax(logits) and
    cov = diag(m) - m m^T + eps*I.  ``literal_sign=True`` flips the outer
    product's sign (non-multinomial variant kept for comparison; its
    covariance is not a multinomial second moment).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = softmax(logits)
    outer = np.outer(m, m)
    cov = np.diag(m) + (outer if literal_sign else -outer)
    cov += eps * np.eye(m.size)
    return m, cov


def classification_step(belief, spec: NetworkSpec, x, label: int,
                        eps: float, noise: NoiseConfig | None = None,
                        literal_sign: bool = False):
    """Condition on a class label through the softmax observation model.

    The observation function is softmax(f(theta, x)) with moment-matched
    Gaussian noise: Jacobians are chained with A = diag(m) - m m^T, the
    innovation is onehot(label) - m, and R^{1/2} is the Cholesky factor of
    the matched covariance.  Drift variances come from ``noise`` when
    given (its r_half is ignored).
    """
    split, _ = param_counts(spec)
    params = _flat_mean(belief, split)
    logits = forward(spec, params, x)
    jac = jacobians(spec, params, x)
    m, cov = moment_matched_obs(logits, eps, literal_sign=literal_sign)
    a = np.diag(m) - np.outer(m, m)  # softmax Jacobian at the logits
    r_half = np.linalg.cholesky(cov).T
    step_noise = NoiseConfig(
        r_half=r_half,
        q_last=noise.q_last if noise is not None else 0.0,
        q_hidden=noise.q_hidden if noise is not None else 0.0,
    )
    y = np.zeros(m.size)
    y[label] = 1.0
    return update_obs(
        belief, spec, y - m, a @ jac.l_tilde, a @ jac.h_tilde, step_noise
    )


# ---------------------------------------------------------------------------
# serialization

_FORMAT = "predfilt-belief"
_VERSION = 1

_KINDS = {
    DenseBelief: "dense",
    LrkfBelief: "lrkf",
    HiLoFiBelief: "hilofi",
    LoLoFiBelief: "lolofi",
}
_FIELDS = {
    "dense": ("mean", "cov"),
    "lrkf": ("mean", "w"),
    "hilofi": ("mean_last", "mean_hidden", "sigma_last_half", "c_hidden"),
    "lolofi": ("mean_last", "mean_hidden", "c_last", "c_hidden"),
}
_TYPES = {v: k for k, v in _KINDS.items()}


def spec_hash(spec: NetworkSpec) -> str:
    """Stable digest of the architecture, stored with checkpoints."""
    payload = json.dumps(
        {
            "input_dim": spec.input_dim,
            "hidden_widths": list(spec.hidden_widths),
            "output_dim": spec.output_dim,
            "activation": spec.activation,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def save_belief(belief, spec: NetworkSpec, path) -> None:
    """Versioned JSON checkpoint of (spec hash, means, factors).

    Floats serialize via repr and round-trip bit-exactly; the layout is
    documented in the README and stable across minor versions.
    """
    kind = _KINDS.get(type(belief))
    if kind is None:
        raise TypeError(f"unknown belief type {type(belief).__name__}")
    doc = {
        "format": _FORMAT,
        "version": _VERSION,
        "kind": kind,
        "spec_hash": spec_hash(spec),
        "arrays": {
            name: getattr(belief, name).tolist() for name in _FIELDS[kind]
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_belief(path, spec: NetworkSpec | None = None):
    """Load a checkpoint; verifies the spec hash when a spec is given."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _FORMAT or doc.get("version") != _VERSION:
        raise ValueError("not a recognized belief checkpoint")
    if spec is not None and doc["spec_hash"] != spec_hash(spec):
        raise ValueError("checkpoint was written for a different architecture")
    kind = doc["kind"]
    arrays = {
        name: np.asarray(doc["arrays"][name], dtype=np.float64)
        for name in _FIELDS[kind]
    }
    return _TYPES[kind](**arrays)
