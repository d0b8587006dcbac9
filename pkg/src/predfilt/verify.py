"""Desk-scale verification suites behind ``predfilt verify <suite>``.

Each check reproduces one documented claim as a measured-vs-threshold
comparison.  Checks are fully seeded and print the measurement either
way; a check that needs an absent dataset reports "skipped" rather than
failing.  The pytest acceptance suite calls the same functions, so the
CLI and the tests cannot drift apart.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import bench
from .bounds import hilofi_cov_bound, lrkf_blup_gap_bound, lrkf_cov_bound
from .decision import DiscreteActions, predictive_sample_action
from .environments import (
    MnistBandit,
    SyntheticBandit,
    load_mnist_idx,
    mnist_paths,
    resolve_data_dir,
)
from .filters import (
    HiLoFiBelief,
    LrkfBelief,
    NoiseConfig,
    _flat_mean,
    _hilofi_update,
    _lrkf_update,
    classification_step,
    dense_predict_update,
    init_dense,
    init_hilofi,
    init_lrkf,
    lrkf_step,
    moment_matched_obs,
    predictive,
    sample_function,
    update_obs,
)
from .linalg import lowrank_project, qr_stack
from .net import (
    FlatParams,
    NetworkSpec,
    forward,
    forward_batch,
    init_params,
    jacobians,
    jvp_params,
    param_counts,
)

__all__ = ["CheckResult", "SUITES", "verify", "format_report"]


@dataclass
class CheckResult:
    name: str
    passed: bool | None  # None means skipped
    measured: str
    threshold: str
    seconds: float

    @property
    def label(self) -> str:
        return {True: "PASS", False: "FAIL", None: "SKIP"}[self.passed]


def _timed(name, fn) -> CheckResult:
    t0 = time.perf_counter()
    passed, measured, threshold = fn()
    if passed is not None:
        passed = bool(passed)
    return CheckResult(name, passed, measured, threshold,
                       time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# linalg suite


def _check_qr_stack():
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(1000):
        cols = int(rng.integers(1, 33))
        blocks = [
            rng.standard_normal((int(rng.integers(1, 2 * cols + 2)), cols))
            for _ in range(int(rng.integers(1, 5)))
        ]
        r = qr_stack(blocks)
        target = sum(b.T @ b for b in blocks)
        err = np.linalg.norm(r.T @ r - target) / max(np.linalg.norm(target), 1e-300)
        worst = max(worst, err)
    return worst <= 1e-9, f"max relative error {worst:.2e}", "<= 1e-9"


def _best_rank_d(mat: np.ndarray, d: int) -> np.ndarray:
    w, u = np.linalg.eigh(mat)
    order = np.argsort(w)[::-1][:d]
    kept = np.clip(w[order], 0.0, None)
    return (u[:, order] * kept) @ u[:, order].T


def _check_lowrank_project():
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(1000):
        cols = int(rng.integers(1, 33))
        d = int(rng.integers(1, cols + 1))
        blocks = [
            rng.standard_normal((int(rng.integers(1, 2 * cols + 2)), cols))
            for _ in range(int(rng.integers(1, 4)))
        ]
        j = lowrank_project(blocks, d)
        target = _best_rank_d(sum(b.T @ b for b in blocks), d)
        worst = max(worst, np.linalg.norm(j.T @ j - target))
    return worst <= 1e-7, f"max Frobenius error {worst:.2e}", "<= 1e-7"


# ---------------------------------------------------------------------------
# oracle suite


def _check_lrkf_dense_equivalence():
    spec = NetworkSpec(2, (4,), 1, "elu")
    d_theta = sum(param_counts(spec))
    params = init_params(spec, 7)
    rng = np.random.default_rng(2001)
    params = FlatParams(
        params.theta + 0.3 * rng.standard_normal(d_theta), params.split
    )
    noise = NoiseConfig.from_scalars(1, r=0.3)
    dense = init_dense(spec, params, 1.0, 1.0)
    lrkf = init_lrkf(spec, params, 1.0, d_theta)
    worst_mean, worst_cov = 0.0, 0.0
    for _ in range(50):
        x = rng.uniform(-2.0, 2.0, size=2)
        y = np.array([np.sin(x.sum()) + 0.1 * rng.standard_normal()])
        dense = dense_predict_update(dense, spec, x, y, noise)
        lrkf = lrkf_step(lrkf, spec, x, y, noise)
        worst_mean = max(worst_mean, np.abs(dense.mean - lrkf.mean).max())
        worst_cov = max(
            worst_cov, np.linalg.norm(dense.cov - lrkf.w.T @ lrkf.w)
        )
    ok = worst_mean <= 1e-8 and worst_cov <= 1e-6
    return (
        ok,
        f"mean gap {worst_mean:.2e}, cov gap {worst_cov:.2e}",
        "mean <= 1e-8, cov <= 1e-6",
    )


def _fd_jacobian(spec, params, x, h=1e-6):
    theta = params.theta
    d_y = spec.output_dim
    jac = np.empty((d_y, theta.size))
    for i in range(theta.size):
        step = h * max(1.0, abs(theta[i]))
        plus = theta.copy()
        plus[i] += step
        minus = theta.copy()
        minus[i] -= step
        jac[:, i] = (
            forward(spec, FlatParams(plus, params.split), x)
            - forward(spec, FlatParams(minus, params.split), x)
        ) / (2.0 * step)
    return jac


def _check_jacobians_fd():
    rng = np.random.default_rng(2002)
    worst = 0.0
    for _ in range(100):
        depth = int(rng.integers(0, 3))
        spec = NetworkSpec(
            input_dim=int(rng.integers(1, 5)),
            hidden_widths=tuple(int(rng.integers(2, 7)) for _ in range(depth)),
            output_dim=int(rng.integers(1, 4)),
            activation=str(rng.choice(["elu", "tanh", "relu"])),
        )
        params = init_params(spec, int(rng.integers(1 << 30)))
        params = FlatParams(
            params.theta + 0.5 * rng.standard_normal(params.theta.size),
            params.split,
        )
        x = rng.uniform(-2.0, 2.0, size=spec.input_dim)
        analytic = jacobians(spec, params, x).full
        fd = _fd_jacobian(spec, params, x)
        err = np.linalg.norm(analytic - fd) / max(1.0, np.linalg.norm(fd))
        worst = max(worst, err)
    return worst <= 1e-4, f"max relative error {worst:.2e}", "<= 1e-4"


def _check_constant_time():
    spec = NetworkSpec(2, (128, 128), 1, "elu")
    belief = init_hilofi(spec, init_params(spec, 3), 0.1, 0.1, 50)
    noise = NoiseConfig.from_scalars(1, r=0.1, q_last=1e-6, q_hidden=1e-6)
    rng = np.random.default_rng(2003)
    times = np.empty(1000)
    split, _ = param_counts(spec)
    for t in range(1000):
        x = rng.uniform(-2.0, 2.0, size=2)
        y = np.array([np.sin(x.sum()) + 0.1 * rng.standard_normal()])
        t0 = time.perf_counter_ns()
        params = _flat_mean(belief, split)
        yhat = forward(spec, params, x)
        jac = jacobians(spec, params, x)
        belief = update_obs(belief, spec, y - yhat, jac.l_tilde, jac.h_tilde, noise)
        times[t] = time.perf_counter_ns() - t0
    early = times[:100].mean()
    late = times[900:].mean()
    ratio = late / early
    return (
        ratio <= 2.0,
        f"late/early step-time ratio {ratio:.3f} "
        f"({late / 1e6:.2f} ms vs {early / 1e6:.2f} ms)",
        "<= 2.0",
    )


# ---------------------------------------------------------------------------
# bounds suite


def _hilofi_bound_instance(rng, q):
    d_eta = int(rng.integers(1, 7))
    d_omega_full = int(rng.integers(2, 33))
    d_omega = int(rng.integers(1, d_omega_full + 1))
    d_y = int(rng.integers(1, 4))
    sl = qr_stack([rng.standard_normal((d_eta + 1, d_eta))])
    c = rng.standard_normal((d_omega, d_omega_full)) * 0.7
    l_tilde = rng.standard_normal((d_y, d_eta))
    h_tilde = rng.standard_normal((d_y, d_omega_full))
    a = rng.standard_normal((d_y, d_y))
    r = a.T @ a + 0.1 * np.eye(d_y)
    r_half = np.linalg.cholesky(r).T
    noise = NoiseConfig(r_half=r_half, q_last=q, q_hidden=q)
    belief = HiLoFiBelief(
        mean_last=np.zeros(d_eta),
        mean_hidden=np.zeros(d_omega_full),
        sigma_last_half=sl,
        c_hidden=c,
    )
    eps = rng.standard_normal(d_y)
    new, gains = _hilofi_update(belief, eps, l_tilde, h_tilde, noise,
                                return_gains=True)
    k_l = gains.k_last_t.T  # D_eta x D_y
    k_h = gains.k_hidden_t.T

    sig_eta = sl.T @ sl
    sig_omega = c.T @ c
    ikl = np.eye(d_eta) - k_l @ l_tilde
    ikh = np.eye(d_omega_full) - k_h @ h_tilde
    ref_eta = ikl @ (sig_eta + q * np.eye(d_eta)) @ ikl.T + k_l @ r @ k_l.T
    ref_omega = ikh @ (sig_omega + q * np.eye(d_omega_full)) @ ikh.T + k_h @ r @ k_h.T
    cross = k_l @ r @ k_h.T
    ref = np.block([[ref_eta, cross], [cross.T, ref_omega]])
    approx = np.block(
        [
            [new.sigma_last_half.T @ new.sigma_last_half,
             np.zeros((d_eta, d_omega_full))],
            [np.zeros((d_omega_full, d_eta)), new.c_hidden.T @ new.c_hidden],
        ]
    )
    measured = np.linalg.norm(ref - approx)

    surr_omega = ikh @ sig_omega @ ikh.T + k_h @ r @ k_h.T + q * np.eye(d_omega_full)
    eigs = np.sort(np.linalg.eigvalsh(surr_omega))[: d_omega_full - d_omega]
    args = (k_l, k_h, l_tilde, h_tilde, r, q, q, eigs)
    bound = max(
        hilofi_cov_bound(*args, squared_cross=True),
        hilofi_cov_bound(*args, squared_cross=False),
    )
    return measured, bound


def _lrkf_bound_instance(rng, q):
    d_full = int(rng.integers(4, 33))
    d = int(rng.integers(1, d_full + 1))
    d_y = int(rng.integers(1, 4))
    w = rng.standard_normal((d, d_full)) * 0.7
    jac = rng.standard_normal((d_y, d_full))
    a = rng.standard_normal((d_y, d_y))
    r = a.T @ a + 0.1 * np.eye(d_y)
    noise = NoiseConfig(r_half=np.linalg.cholesky(r).T, q_last=q, q_hidden=q)
    belief = LrkfBelief(mean=np.zeros(d_full), w=w)
    eps = rng.standard_normal(d_y)
    new, gains = _lrkf_update(belief, eps, jac, noise, inflate_factor=True,
                              split=0, return_gains=True)
    k = gains.k_last_t.T  # D x D_y
    ikj = np.eye(d_full) - k @ jac
    ref = ikj @ (w.T @ w + q * np.eye(d_full)) @ ikj.T + k @ r @ k.T
    measured = np.linalg.norm(ref - new.w.T @ new.w)
    surr = ikj @ (w.T @ w) @ ikj.T + k @ r @ k.T + q * np.eye(d_full)
    eigs = np.sort(np.linalg.eigvalsh(surr))[: d_full - d]
    bound = lrkf_cov_bound(k, jac, q, eigs)
    return measured, bound


def _check_cov_bounds():
    rng = np.random.default_rng(3001)
    qs = (0.0, 1e-6, 1e-2)
    violations = 0
    worst_margin = np.inf
    for i in range(500):
        q = qs[i % 3]
        for instance in (_hilofi_bound_instance, _lrkf_bound_instance):
            measured, bound = instance(rng, q)
            slack = 1e-9 * max(1.0, bound)
            if measured > bound + slack:
                violations += 1
            worst_margin = min(worst_margin, bound - measured)
    return (
        violations == 0,
        f"{violations} violations over 1000 checks "
        f"(tightest margin {worst_margin:.2e})",
        "0 violations",
    )


def _check_blup_gap():
    rng = np.random.default_rng(3002)
    d_full = 12
    violations = 0
    worst_margin = np.inf
    for _ in range(1000):
        g = rng.standard_normal((d_full + 2, d_full))
        sigma = g.T @ g / d_full
        x = rng.standard_normal(d_full)
        r2 = float(rng.uniform(0.01, 1.0))
        eps = float(rng.normal(0.0, 2.0))
        d = int(rng.integers(1, d_full))
        w, u = np.linalg.eigh(sigma)
        order = np.argsort(w)[::-1]
        sigma_hat = (u[:, order[:d]] * w[order[:d]]) @ u[:, order[:d]].T
        k_full = sigma @ x / (x @ sigma @ x + r2)
        k_hat = sigma_hat @ x / (x @ sigma_hat @ x + r2)
        gap = abs(eps) * np.linalg.norm(k_full - k_hat)
        bound = lrkf_blup_gap_bound(eps, sigma, x, r2, d)
        if gap > bound + 1e-9 * max(1.0, bound):
            violations += 1
        worst_margin = min(worst_margin, bound - gap)
    return (
        violations == 0,
        f"{violations} violations over 1000 instances "
        f"(tightest margin {worst_margin:.2e})",
        "0 violations",
    )


# ---------------------------------------------------------------------------
# uncertainty suite


def _check_inbetween():
    cfg = replace(
        bench.default_config("inbetween"), filter="hilofi", rank_hidden=50
    )
    hits = 0
    ratios = []
    for seed in range(10):
        _, summary = bench._run_inbetween_seed(cfg, seed)
        ratios.append(summary["gap_ratio"])
        if summary["gap_ratio"] >= 1.5:
            hits += 1
    return (
        hits >= 9,
        f"{hits}/10 seeds with gap-std ratio >= 1.5 "
        f"(median ratio {np.median(ratios):.2f})",
        ">= 9/10 seeds",
    )


def _check_moment_match_eigs():
    rng = np.random.default_rng(4001)
    eps = 1e-4
    worst = np.inf
    for _ in range(10000):
        logits = rng.normal(0.0, 3.0, size=10)
        _, cov = moment_matched_obs(logits, eps)
        worst = min(worst, np.linalg.eigvalsh(cov)[0])
    return (
        worst >= eps - 1e-12,
        f"min eigenvalue {worst:.6e} (eps {eps:.0e})",
        ">= eps - 1e-12",
    )


def _mnist_arrays():
    try:
        images_path, labels_path = mnist_paths(resolve_data_dir())
    except FileNotFoundError as exc:
        return None, str(exc)
    return load_mnist_idx(images_path, labels_path), None


def _check_mnist_classification():
    dataset, why = _mnist_arrays()
    if dataset is None:
        return None, f"skipped: {why}", "rolling accuracy >= 0.70"
    images, labels = dataset
    spec = NetworkSpec(784, (64, 64), 10, "elu")
    belief = init_lrkf(spec, init_params(spec, 0), 1.0, 20)
    noise = NoiseConfig.from_scalars(10, r=0.0, q_last=1e-6, q_hidden=1e-6)
    order = np.random.default_rng(4002).permutation(images.shape[0])[:10000]
    split, _ = param_counts(spec)
    correct = []
    for idx in order:
        x, label = images[idx], int(labels[idx])
        logits = forward(spec, _flat_mean(belief, split), x)
        correct.append(1.0 if int(np.argmax(logits)) == label else 0.0)
        belief = classification_step(belief, spec, x, label, eps=1e-4,
                                     noise=noise)
    acc = float(np.mean(correct[-2000:]))
    return acc >= 0.70, f"rolling accuracy {acc:.3f} over final 2000 steps", ">= 0.70"


# ---------------------------------------------------------------------------
# bandit suite


def _check_synthetic_bandit():
    cfg = replace(
        bench.default_config("bandit"),
        filter="hilofi",
        policy="pbayes",
        steps=2000,
        seeds=tuple(range(10)),
    )
    agent_regret = []
    uniform_regret = []
    for seed in cfg.seeds:
        env = SyntheticBandit(cfg.n_arms, cfg.context_dim, cfg.noise_std,
                              bench.make_rng(seed, "env"), cfg.drift_std)
        _, summary = bench._run_bandit_seed(cfg, seed, env)
        agent_regret.append(summary["final_regret"])
        env = SyntheticBandit(cfg.n_arms, cfg.context_dim, cfg.noise_std,
                              bench.make_rng(seed, "env"), cfg.drift_std)
        rng = bench.make_rng(seed, "agent")
        regret = 0.0
        for _ in range(cfg.steps):
            x = env.context()
            reward, best = env.reward(x, int(rng.integers(cfg.n_arms)))
            regret += best - reward
        uniform_regret.append(regret)
    ratio = np.mean(agent_regret) / np.mean(uniform_regret)
    return (
        ratio <= 0.40,
        f"regret ratio {ratio:.3f} "
        f"(agent {np.mean(agent_regret):.1f} vs uniform "
        f"{np.mean(uniform_regret):.1f})",
        "<= 0.40 of uniform",
    )


def _check_mnist_bandit():
    dataset, why = _mnist_arrays()
    if dataset is None:
        return None, f"skipped: {why}", "hilofi >= lrkf >= 0.8*hilofi; tail >= 0.40"
    images, labels = dataset
    totals = {}
    tails = {}
    for filt in ("hilofi", "lrkf"):
        cfg = replace(
            bench.default_config("mnist_bandit"),
            filter=filt,
            policy="pbayes",
            seeds=tuple(range(5)),
        )
        per_seed = []
        per_tail = []
        for seed in cfg.seeds:
            env = MnistBandit(images, labels, bench.make_rng(seed, "env"))
            _, summary = bench._run_bandit_seed(cfg, seed, env)
            per_seed.append(summary["total_reward"])
            per_tail.append(summary["avg_reward_tail"])
        totals[filt] = float(np.mean(per_seed))
        tails[filt] = float(np.mean(per_tail))
    ordering = totals["hilofi"] >= totals["lrkf"] >= 0.8 * totals["hilofi"]
    tail_ok = tails["hilofi"] >= 0.40
    return (
        ordering and tail_ok,
        f"hilofi {totals['hilofi']:.0f}, lrkf {totals['lrkf']:.0f}, "
        f"hilofi tail avg {tails['hilofi']:.3f}",
        "hilofi >= lrkf >= 0.8*hilofi; tail >= 0.40",
    )


def _check_policy_timing():
    # Selection cost on top of the per-step linearization the pipeline
    # computes for the update and trace regardless of policy: predictive
    # sampling draws K outcome-space values, Thompson sampling re-draws
    # ten parameter-space perturbations through the covariance factors.
    spec = NetworkSpec(64, (256, 128), 10, "elu")
    d_theta = sum(param_counts(spec))
    belief = init_hilofi(spec, init_params(spec, 1), 0.1, 0.1, 50)
    noise = NoiseConfig.from_scalars(10, r=0.1)
    actions = DiscreteActions(n_actions=10)
    rng = np.random.default_rng(5001)
    x = rng.standard_normal(64)
    split, _ = param_counts(spec)
    params = _flat_mean(belief, split)
    pred = predictive(belief, spec, x, noise)

    def pbayes_call():
        predictive_sample_action(belief, spec, x, actions, noise, rng,
                                 pred=pred)

    def ts10_call():
        xs = x[None, :]
        base = forward_batch(spec, params, xs)
        vals = np.zeros(10)
        for _ in range(10):
            delta = sample_function(belief, spec, rng)
            vals += (base + jvp_params(spec, params, delta, xs))[0]
        int(np.argmax(vals))

    def best_of(fn, reps=30):
        fn()  # warm caches
        samples = []
        for _ in range(reps):
            t0 = time.perf_counter_ns()
            fn()
            samples.append(time.perf_counter_ns() - t0)
        return float(np.median(samples))

    t_pbayes = best_of(pbayes_call)
    t_ts10 = best_of(ts10_call)
    ratio = t_ts10 / t_pbayes
    return (
        ratio >= 5.0,
        f"TS-10 / pBayes selection-time ratio {ratio:.1f} at "
        f"D_theta={d_theta} ({t_ts10 / 1e6:.2f} ms vs {t_pbayes / 1e6:.3f} ms)",
        ">= 5.0",
    )


# ---------------------------------------------------------------------------
# bo suite


def _bo_medians(function: str, seeds=20):
    cfg = replace(
        bench.default_config("bo"),
        policy="ts",
        bo_function=function,
        bo_dim=2,
        steps=100,
        seeds=tuple(range(seeds)),
    )
    best = [
        bench._run_bo_seed(cfg, seed)[1]["best_value"] for seed in cfg.seeds
    ]
    return float(np.median(best))


def _check_bo_branin():
    med = _bo_medians("branin")
    return med >= -0.90, f"median best value {med:.3f} over 20 seeds", ">= -0.90"


def _check_bo_ackley():
    med = _bo_medians("ackley")
    return med >= -1.0, f"median best value {med:.3f} over 20 seeds", ">= -1.0"


SUITES = {
    "linalg": [
        ("qr-stack reconstruction", _check_qr_stack),
        ("low-rank projection vs dense oracle", _check_lowrank_project),
    ],
    "oracle": [
        ("full-rank low-rank filter matches dense", _check_lrkf_dense_equivalence),
        ("jacobians vs finite differences", _check_jacobians_fd),
        ("constant per-step cost", _check_constant_time),
    ],
    "bounds": [
        ("covariance error bounds", _check_cov_bounds),
        ("mean-gap bound, linear model", _check_blup_gap),
    ],
    "uncertainty": [
        ("in-between uncertainty ratio", _check_inbetween),
        ("moment-matched covariance floor", _check_moment_match_eigs),
        ("online image classification", _check_mnist_classification),
    ],
    "bandit": [
        ("synthetic bandit regret", _check_synthetic_bandit),
        ("image bandit reward ordering", _check_mnist_bandit),
        ("predictive sampling vs 10-draw Thompson", _check_policy_timing),
    ],
    "bo": [
        ("branin best value", _check_bo_branin),
        ("ackley-2d best value", _check_bo_ackley),
    ],
}


def verify(suite: str) -> list[CheckResult]:
    if suite not in SUITES:
        raise ValueError(
            f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}"
        )
    return [_timed(name, fn) for name, fn in SUITES[suite]]


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for res in results:
        lines.append(
            f"[{res.label}] {res.name}: {res.measured} "
            f"(threshold {res.threshold}) [{res.seconds:.1f}s]"
        )
    return "\n".join(lines)
