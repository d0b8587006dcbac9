"""Benchmark harness: TOML-configured experiments with traced runs.

An experiment is (environment x filter x policy) over a list of seeds.
Each seed writes one JSON-Lines trace (a record per step) and the run
writes one summary CSV (a row per seed plus mean/std rows).  Agent and
environment randomness come from separate counter-based streams keyed by
(seed, stream), so two policies see identical environment draws at the
same seed.

Summaries contain only deterministic fields; per-step wall times live in
the traces.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import bounds as bounds_mod
from .decision import (
    BoxDomain,
    DiscreteActions,
    bo_propose,
    epsilon_greedy_action,
    lowdisc_candidates,
    predictive_sample_action,
    thompson_sample_action,
)
from .environments import (
    BoFunction,
    MnistBandit,
    SyntheticBandit,
    bo_eval,
    inbetween_dataset,
    load_mnist_idx,
    mnist_paths,
    resolve_data_dir,
)
from .filters import (
    NoiseConfig,
    init_dense,
    init_hilofi,
    init_lolofi,
    init_lrkf,
    predictive,
    update_obs,
)
from .net import NetworkSpec, forward, init_params, jacobians, param_counts

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "default_config",
    "load_config",
    "validate_config",
    "make_rng",
    "StepRecord",
    "run",
]

EXPERIMENTS = ("inbetween", "bandit", "mnist_bandit", "bo")
FILTERS = ("dense", "lrkf", "hilofi", "lolofi")
POLICIES = ("pbayes", "ts", "eps_greedy", "ei")
BO_FUNCTIONS = ("ackley", "branin", "hartmann6", "drawnn")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists the offenses."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    filter: str = "hilofi"
    policy: str = "pbayes"
    steps: int = 1000
    seeds: tuple[int, ...] = (0,)
    diagnostics: bool = False
    init_seed: int = 0
    epsilon: float = 0.05
    candidate_count: int = 512
    net: NetworkSpec = NetworkSpec(2, (32, 32), 5, "elu")
    rank_hidden: int = 50
    rank_last: int = 100
    rank_joint: int = 50
    q_last: float = 1e-6
    q_hidden: float = 1e-6
    r: float = 0.1
    eps: float = 1e-4
    prior_var_last: float = 0.1
    prior_var_hidden: float = 0.1
    prior_var_joint: float = 1.0
    n_arms: int = 5
    context_dim: int = 2
    noise_std: float = 0.1
    drift_std: float = 0.0
    data_dir: str = ""
    bo_function: str = "branin"
    bo_dim: int = 2
    bo_seed: int = 0
    bo_input_scale: float = 4.0
    bo_warmup: int = 10
    refine: bool = False


def default_config(experiment: str) -> ExperimentConfig:
    """Per-experiment hyperparameter defaults."""
    base = ExperimentConfig(experiment=experiment)
    if experiment == "bandit":
        return base
    if experiment == "mnist_bandit":
        return replace(
            base,
            net=NetworkSpec(784, (64, 64), 10, "elu"),
            steps=20000,
            r=1.0,
            n_arms=10,
            context_dim=784,
        )
    if experiment == "inbetween":
        return replace(
            base,
            net=NetworkSpec(1, (128, 128, 128, 128), 1, "elu"),
            steps=120,
            r=0.0,
            q_last=0.0,
            q_hidden=0.0,
            prior_var_last=0.5,
            prior_var_hidden=0.5,
        )
    if experiment == "bo":
        return replace(
            base,
            policy="ts",
            net=NetworkSpec(2, (64, 64, 64), 1, "elu"),
            steps=100,
            r=1e-3,
            q_last=0.0,
            q_hidden=0.0,
            prior_var_last=1.0,
            prior_var_hidden=1e-4,
            refine=True,
        )
    raise ConfigError([f"unknown experiment {experiment!r}"])


# TOML section/key -> config attribute
_TOP_KEYS = {
    "experiment": "experiment",
    "filter": "filter",
    "policy": "policy",
    "steps": "steps",
    "seeds": "seeds",
    "diagnostics": "diagnostics",
    "init_seed": "init_seed",
    "epsilon": "epsilon",
    "candidate_count": "candidate_count",
}
_SECTIONS = {
    "net": {
        "input_dim": "input_dim",
        "hidden_widths": "hidden_widths",
        "output_dim": "output_dim",
        "activation": "activation",
    },
    "ranks": {"hidden": "rank_hidden", "last": "rank_last", "joint": "rank_joint"},
    "noise": {"q_last": "q_last", "q_hidden": "q_hidden", "r": "r", "eps": "eps"},
    "prior": {
        "var_last": "prior_var_last",
        "var_hidden": "prior_var_hidden",
        "var_joint": "prior_var_joint",
    },
    "bandit": {
        "n_arms": "n_arms",
        "context_dim": "context_dim",
        "noise_std": "noise_std",
        "drift_std": "drift_std",
    },
    "mnist": {"data_dir": "data_dir"},
    "bo": {
        "function": "bo_function",
        "dim": "bo_dim",
        "seed": "bo_seed",
        "input_scale": "bo_input_scale",
        "warmup": "bo_warmup",
        "refine": "refine",
    },
}


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment config.

    Unknown keys are errors (typos should not silently fall back to
    defaults); missing keys take the experiment's defaults.
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    problems: list[str] = []
    if "experiment" not in doc:
        raise ConfigError(["missing required key: experiment"])
    if doc["experiment"] not in EXPERIMENTS:
        raise ConfigError(
            [f"unknown experiment {doc['experiment']!r}; "
             f"expected one of {', '.join(EXPERIMENTS)}"]
        )
    cfg = default_config(doc["experiment"])
    overrides: dict = {}
    net_overrides: dict = {}
    for key, value in doc.items():
        if key in _TOP_KEYS:
            overrides[_TOP_KEYS[key]] = tuple(value) if key == "seeds" else value
        elif key in _SECTIONS:
            table = _SECTIONS[key]
            if not isinstance(value, dict):
                problems.append(f"{key} must be a table")
                continue
            for sub, subval in value.items():
                if sub not in table:
                    problems.append(f"unknown key {key}.{sub}")
                elif key == "net":
                    net_overrides[table[sub]] = (
                        tuple(subval) if sub == "hidden_widths" else subval
                    )
                else:
                    overrides[table[sub]] = subval
        else:
            problems.append(f"unknown key {key}")
    if problems:
        raise ConfigError(problems)
    if net_overrides:
        net_fields = {
            "input_dim": cfg.net.input_dim,
            "hidden_widths": cfg.net.hidden_widths,
            "output_dim": cfg.net.output_dim,
            "activation": cfg.net.activation,
        }
        net_fields.update(net_overrides)
        overrides["net"] = NetworkSpec(**net_fields)
    cfg = replace(cfg, **overrides)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    problems: list[str] = []
    if cfg.experiment not in EXPERIMENTS:
        problems.append(f"unknown experiment {cfg.experiment!r}")
    if cfg.filter not in FILTERS:
        problems.append(f"unknown filter {cfg.filter!r}")
    if cfg.policy not in POLICIES:
        problems.append(f"unknown policy {cfg.policy!r}")
    if cfg.steps < 1:
        problems.append("steps must be >= 1")
    if not cfg.seeds:
        problems.append("seeds must be nonempty")
    if any(s < 0 for s in cfg.seeds):
        problems.append("seeds must be nonnegative")
    if min(cfg.q_last, cfg.q_hidden, cfg.r) < 0:
        problems.append("noise terms must be nonnegative")
    if cfg.eps <= 0:
        problems.append("noise.eps must be positive")
    if not 0 <= cfg.epsilon <= 1:
        problems.append("epsilon must lie in [0, 1]")
    if cfg.candidate_count < 1:
        problems.append("candidate_count must be >= 1")
    d_hidden, d_last = param_counts(cfg.net)
    if cfg.filter in ("hilofi", "lolofi") and not 1 <= cfg.rank_hidden <= d_hidden:
        problems.append(
            f"ranks.hidden must lie in [1, {d_hidden}] for this net"
        )
    if cfg.filter == "lolofi" and not 1 <= cfg.rank_last <= d_last:
        problems.append(f"ranks.last must lie in [1, {d_last}] for this net")
    if cfg.filter == "lrkf" and not 1 <= cfg.rank_joint <= d_hidden + d_last:
        problems.append(
            f"ranks.joint must lie in [1, {d_hidden + d_last}] for this net"
        )
    if cfg.experiment in ("bandit", "mnist_bandit"):
        if cfg.policy not in ("pbayes", "ts", "eps_greedy"):
            problems.append(f"policy {cfg.policy!r} not usable on bandits")
        if cfg.net.output_dim != cfg.n_arms:
            problems.append("net.output_dim must equal bandit.n_arms")
        if cfg.net.input_dim != cfg.context_dim:
            problems.append("net.input_dim must equal bandit.context_dim")
    if cfg.experiment == "bandit" and (cfg.noise_std < 0 or cfg.drift_std < 0):
        problems.append("bandit noise/drift std must be nonnegative")
    if cfg.experiment == "mnist_bandit" and (
        cfg.net.input_dim != 784 or cfg.net.output_dim != 10
    ):
        problems.append("mnist_bandit needs a 784-input, 10-output net")
    if cfg.experiment == "bo":
        if cfg.policy not in ("ts", "ei"):
            problems.append("bo supports only ts and ei policies")
        if cfg.bo_function not in BO_FUNCTIONS:
            problems.append(f"unknown bo.function {cfg.bo_function!r}")
        if cfg.bo_function == "branin" and cfg.bo_dim != 2:
            problems.append("branin is 2-dimensional")
        if cfg.bo_function == "hartmann6" and cfg.bo_dim != 6:
            problems.append("hartmann6 is 6-dimensional")
        if cfg.bo_dim < 1:
            problems.append("bo.dim must be >= 1")
        if cfg.bo_input_scale <= 0:
            problems.append("bo.input_scale must be positive")
        if cfg.bo_warmup < 0:
            problems.append("bo.warmup must be nonnegative")
        if cfg.net.input_dim != cfg.bo_dim or cfg.net.output_dim != 1:
            problems.append("bo needs net.input_dim == bo.dim and output_dim 1")
    if problems:
        raise ConfigError(problems)


_STREAMS = {"agent": 0, "env": 1}


def make_rng(seed: int, stream: str) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream name)."""
    if stream not in _STREAMS:
        raise ValueError(f"unknown stream {stream!r}")
    key = np.array([seed, _STREAMS[stream]], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class StepRecord:
    t: int
    action: object  # arm index, query point list, or training input
    reward: float
    cum_reward: float
    regret: float
    wall_ns: int
    pred_mean: float
    pred_std: float
    diagnostics: dict | None = None

    def to_json(self) -> str:
        doc = {
            "t": self.t,
            "action": self.action,
            "reward": self.reward,
            "cum_reward": self.cum_reward,
            "regret": self.regret,
            "wall_ns": self.wall_ns,
            "pred_mean": self.pred_mean,
            "pred_std": self.pred_std,
        }
        if self.diagnostics is not None:
            doc["diagnostics"] = self.diagnostics
        return json.dumps(doc)


def _build_belief(cfg: ExperimentConfig, seed: int = 0):
    # seeds index independent trials, so the net init varies with the run
    # seed; init_seed just offsets the stream.
    params0 = init_params(cfg.net, cfg.init_seed + seed)
    if cfg.filter == "dense":
        return init_dense(cfg.net, params0, cfg.prior_var_last, cfg.prior_var_hidden)
    if cfg.filter == "lrkf":
        return init_lrkf(cfg.net, params0, cfg.prior_var_joint, cfg.rank_joint)
    if cfg.filter == "hilofi":
        return init_hilofi(
            cfg.net, params0, cfg.prior_var_last, cfg.prior_var_hidden,
            cfg.rank_hidden,
        )
    return init_lolofi(
        cfg.net, params0, cfg.prior_var_last, cfg.prior_var_hidden,
        cfg.rank_last, cfg.rank_hidden,
    )


def _mean_params(belief, spec):
    from .filters import _flat_mean

    split, _ = param_counts(spec)
    return _flat_mean(belief, split)


def _bound_diagnostics(cfg, belief_before, gains, l_row, h_row, r_half):
    """Computable bound terms for one step; tail needs a dense surrogate
    and is only evaluated for small hidden blocks."""
    from .filters import HiLoFiBelief, LoLoFiBelief, LrkfBelief

    k_lt, k_ht = gains.k_last_t, gains.k_hidden_t
    r = r_half.T @ r_half
    if isinstance(belief_before, LrkfBelief):
        jac = np.hstack([h_row, l_row])
        kt = np.hstack([k_ht, k_lt])
        bound = bounds_mod.lrkf_cov_bound(kt.T, jac, cfg.q_hidden, np.empty(0))
        return {"bound_no_tail": bound}
    if not isinstance(belief_before, (HiLoFiBelief, LoLoFiBelief)):
        return None
    partial = bounds_mod.hilofi_cov_bound(
        k_lt.T, k_ht.T, l_row, h_row, r, cfg.q_last, cfg.q_hidden, np.empty(0)
    )
    out = {"bound_no_tail": partial}
    c = belief_before.c_hidden
    d_hidden = c.shape[1]
    if d_hidden <= 64:
        ikh = np.eye(d_hidden) - k_ht.T @ h_row
        surr = ikh @ (c.T @ c) @ ikh.T + k_ht.T @ r @ k_ht
        surr += cfg.q_hidden * np.eye(d_hidden)
        eigs = np.sort(np.linalg.eigvalsh(surr))[: d_hidden - c.shape[0]]
        out["bound_total"] = bounds_mod.hilofi_cov_bound(
            k_lt.T, k_ht.T, l_row, h_row, r,
            cfg.q_last, cfg.q_hidden, eigs,
        )
    return out


def _run_bandit_seed(cfg: ExperimentConfig, seed: int, env) -> tuple[list[StepRecord], dict]:
    agent_rng = make_rng(seed, "agent")
    belief = _build_belief(cfg, seed)
    noise = NoiseConfig.from_scalars(
        cfg.net.output_dim, cfg.r, cfg.q_last, cfg.q_hidden
    )
    actions = DiscreteActions(n_actions=env.n_arms)
    cum = 0.0
    regret = 0.0
    records: list[StepRecord] = []
    tail_window = min(5000, cfg.steps)
    tail_sum = 0.0
    for t in range(1, cfg.steps + 1):
        x = env.context()
        t0 = time.perf_counter_ns()
        # One linearization per step, shared by the predictive, the policy
        # and the update; the predictive is recorded for every policy.
        params = _mean_params(belief, cfg.net)
        yhat = forward(cfg.net, params, x)
        jac = jacobians(cfg.net, params, x)
        pred = predictive(belief, cfg.net, x, noise, jac=jac)
        t1 = time.perf_counter_ns()
        if cfg.policy == "pbayes":
            action, _ = predictive_sample_action(
                belief, cfg.net, x, actions, noise, agent_rng, pred=pred
            )
        elif cfg.policy == "ts":
            action = thompson_sample_action(belief, cfg.net, x, actions, agent_rng)
        else:
            action = epsilon_greedy_action(
                belief, cfg.net, x, actions, cfg.epsilon, agent_rng
            )
        t2 = time.perf_counter_ns()
        reward, best = env.reward(x, action)
        t3 = time.perf_counter_ns()
        l_row = jac.l_tilde[action : action + 1]
        h_row = jac.h_tilde[action : action + 1]
        step_noise = noise.slice_output(action)
        belief_before = belief
        out = update_obs(
            belief, cfg.net, np.array([reward - yhat[action]]),
            l_row, h_row, step_noise, return_gains=cfg.diagnostics,
        )
        t4 = time.perf_counter_ns()
        if cfg.diagnostics:
            belief, gains = out
            diag = _bound_diagnostics(
                cfg, belief_before, gains, l_row, h_row, step_noise.r_half
            )
        else:
            belief = out
            diag = None
        cum += reward
        regret += best - reward
        if t > cfg.steps - tail_window:
            tail_sum += reward
        records.append(
            StepRecord(
                t=t,
                action=int(action),
                reward=float(reward),
                cum_reward=float(cum),
                regret=float(regret),
                wall_ns=int((t2 - t0) + (t4 - t3)),
                pred_mean=float(yhat[action]),
                pred_std=float(pred.marginal_std()[action]),
                diagnostics=diag,
            )
        )
    summary = {
        "seed": seed,
        "steps": cfg.steps,
        "total_reward": cum,
        "final_regret": regret,
        "avg_reward_tail": tail_sum / tail_window,
    }
    return records, summary


def _run_inbetween_seed(cfg: ExperimentConfig, seed: int) -> tuple[list[StepRecord], dict]:
    env_rng = make_rng(seed, "env")
    xs, ys = inbetween_dataset(seed)
    order = env_rng.permutation(xs.size)
    belief = _build_belief(cfg, seed)
    noise = NoiseConfig.from_scalars(1, cfg.r, cfg.q_last, cfg.q_hidden)
    records: list[StepRecord] = []
    for t in range(1, cfg.steps + 1):
        idx = order[(t - 1) % xs.size]
        x = np.array([xs[idx]])
        y = np.array([ys[idx]])
        params = _mean_params(belief, cfg.net)
        t0 = time.perf_counter_ns()
        yhat = forward(cfg.net, params, x)
        jac = jacobians(cfg.net, params, x)
        belief = update_obs(
            belief, cfg.net, y - yhat, jac.l_tilde, jac.h_tilde, noise
        )
        wall = time.perf_counter_ns() - t0
        pred = predictive(belief, cfg.net, x, noise)
        records.append(
            StepRecord(
                t=t,
                action=float(x[0]),
                reward=float(y[0]),
                cum_reward=float("nan"),
                regret=0.0,
                wall_ns=int(wall),
                pred_mean=float(pred.mean[0]),
                pred_std=float(pred.marginal_std()[0]),
            )
        )
    gap_std = float(
        predictive(belief, cfg.net, np.array([0.0]), noise).marginal_std()[0]
    )
    train_stds = [
        float(predictive(belief, cfg.net, np.array([v]), noise).marginal_std()[0])
        for v in xs
    ]
    train_mean = float(np.mean(train_stds))
    summary = {
        "seed": seed,
        "steps": cfg.steps,
        "std_at_gap": gap_std,
        "train_std_mean": train_mean,
        "gap_ratio": gap_std / train_mean if train_mean > 0 else float("inf"),
    }
    return records, summary


_BO_KNOWN_MAX = {"ackley": 0.0, "branin": -0.397887, "hartmann6": 3.32237}


def _run_bo_seed(cfg: ExperimentConfig, seed: int) -> tuple[list[StepRecord], dict]:
    """One BO run: warmup on the leading candidates, then acquisition.

    The surrogate works in centered net coordinates ([-s, s]^D for input
    scale s) and on standardized observations; queries are mapped back to
    the unit box for evaluation and recorded there.  The first
    ``bo_warmup`` evaluations fix the output location/scale, which stays
    frozen afterwards so the filter sees a consistent stream.
    """
    agent_rng = make_rng(seed, "agent")
    f = BoFunction(name=cfg.bo_function, dim=cfg.bo_dim, seed=cfg.bo_seed)
    scale = cfg.bo_input_scale
    box = BoxDomain(
        lower=-scale * np.ones(f.dim), upper=scale * np.ones(f.dim),
        candidate_count=cfg.candidate_count,
    )
    candidates = lowdisc_candidates(box, cfg.candidate_count, seed=seed)
    belief = _build_belief(cfg, seed)
    noise = NoiseConfig.from_scalars(1, cfg.r, cfg.q_last, cfg.q_hidden)

    def to_unit(x):
        return (x / scale + 1.0) / 2.0

    warmup_n = min(cfg.bo_warmup, cfg.steps, candidates.shape[0])
    warm_x = [candidates[i] for i in range(warmup_n)]
    warm_y = [bo_eval(f, to_unit(x)) for x in warm_x]
    y_loc = float(np.mean(warm_y)) if warmup_n else 0.0
    y_scale = max(float(np.std(warm_y)), 1e-8) if warmup_n else 1.0

    best = -np.inf
    records: list[StepRecord] = []
    known = _BO_KNOWN_MAX.get(cfg.bo_function)
    for t in range(1, cfg.steps + 1):
        t0 = time.perf_counter_ns()
        y: float | None
        if t <= warmup_n:
            x, y = warm_x[t - 1], warm_y[t - 1]
        elif cfg.policy == "ei" and not np.isfinite(best):
            # EI is undefined before the first observation
            x = candidates[int(agent_rng.integers(candidates.shape[0]))]
            y = None
        else:
            x = bo_propose(
                belief, cfg.net, box, cfg.policy, agent_rng, noise=noise,
                best_so_far=(best - y_loc) / y_scale if np.isfinite(best)
                else None,
                candidates=candidates, refine=cfg.refine,
            )
            y = None
        t1 = time.perf_counter_ns()
        if y is None:
            y = bo_eval(f, to_unit(x))
        t2 = time.perf_counter_ns()
        params = _mean_params(belief, cfg.net)
        yhat = forward(cfg.net, params, x)
        jac = jacobians(cfg.net, params, x)
        belief = update_obs(
            belief, cfg.net, np.array([(y - y_loc) / y_scale - yhat[0]]),
            jac.l_tilde, jac.h_tilde, noise,
        )
        t3 = time.perf_counter_ns()
        best = max(best, y)
        pred = predictive(belief, cfg.net, x, noise)
        records.append(
            StepRecord(
                t=t,
                action=[float(v) for v in to_unit(x)],
                reward=float(y),
                cum_reward=float(best),
                regret=float(max(known - best, 0.0)) if known is not None else 0.0,
                wall_ns=int((t1 - t0) + (t3 - t2)),
                pred_mean=float(pred.mean[0] * y_scale + y_loc),
                pred_std=float(pred.marginal_std()[0] * y_scale),
            )
        )
    summary = {
        "seed": seed,
        "steps": cfg.steps,
        "best_value": float(best),
    }
    if cfg.bo_function in _BO_KNOWN_MAX:
        summary["gap_to_optimum"] = float(
            max(_BO_KNOWN_MAX[cfg.bo_function] - best, 0.0)
        )
    return records, summary


def _load_mnist_for(cfg: ExperimentConfig):
    images_path, labels_path = mnist_paths(resolve_data_dir(cfg.data_dir or None))
    return load_mnist_idx(images_path, labels_path)


def run(config: ExperimentConfig, out_dir, seed_override: int | None = None,
        diagnostics: bool | None = None) -> list[dict]:
    """Execute all seeds, write traces + summary.csv, return summary rows."""
    cfg = config
    if seed_override is not None:
        cfg = replace(cfg, seeds=(seed_override,))
    if diagnostics is not None:
        cfg = replace(cfg, diagnostics=diagnostics)
    validate_config(cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dataset = _load_mnist_for(cfg) if cfg.experiment == "mnist_bandit" else None

    summaries: list[dict] = []
    for seed in cfg.seeds:
        if cfg.experiment == "inbetween":
            records, summary = _run_inbetween_seed(cfg, seed)
        elif cfg.experiment == "bandit":
            env = SyntheticBandit(
                cfg.n_arms, cfg.context_dim, cfg.noise_std,
                make_rng(seed, "env"), cfg.drift_std,
            )
            records, summary = _run_bandit_seed(cfg, seed, env)
        elif cfg.experiment == "mnist_bandit":
            images, labels = dataset
            env = MnistBandit(images, labels, make_rng(seed, "env"))
            records, summary = _run_bandit_seed(cfg, seed, env)
        else:
            records, summary = _run_bo_seed(cfg, seed)
        trace_path = out_dir / f"trace_seed{seed}.jsonl"
        with open(trace_path, "w") as fh:
            for rec in records:
                fh.write(rec.to_json() + "\n")
        summaries.append(summary)

    _write_summary(out_dir / "summary.csv", summaries)
    return summaries


def _write_summary(path, summaries: list[dict]) -> None:
    cols = list(summaries[0].keys())
    numeric = [c for c in cols if c != "seed"]
    rows = [dict(s) for s in summaries]
    if len(summaries) > 1:
        for label, reducer in (("mean", np.mean), ("std", np.std)):
            agg = {"seed": label}
            for c in numeric:
                agg[c] = float(reducer([s[c] for s in summaries]))
            rows.append(agg)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols})
