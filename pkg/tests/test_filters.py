import numpy as np
import pytest

from predfilt.filters import (
    DenseBelief,
    HiLoFiBelief,
    LoLoFiBelief,
    LrkfBelief,
    NoiseConfig,
    classification_step,
    dense_predict_update,
    hilofi_step,
    init_dense,
    init_hilofi,
    init_lolofi,
    init_lrkf,
    load_belief,
    lolofi_step,
    lrkf_step,
    moment_matched_obs,
    predictive,
    sample_function,
    save_belief,
    softmax,
    spec_hash,
    update_obs,
)
from predfilt.net import FlatParams, NetworkSpec, forward, init_params, jacobians, param_counts

import oracles


def _lrkf_cov(b):
    return b.w.T @ b.w


def _hilofi_last_cov(b):
    return b.sigma_last_half.T @ b.sigma_last_half


def _lolofi_last_cov(b):
    return b.c_last.T @ b.c_last


class TestScalarConditioning:
    """One hand-derived update on the scalar model f(x) = w*x + b.

    Prior: w ~ N(0, 1), b pinned at 0 (variance zero).  Observing y = 1 at
    x = 1 with unit observation noise gives S = J Sigma J^T + R = 1 + 1 = 2,
    gain K = Sigma J^T / S = (1/2, 0), posterior mean (1/2, 0) and
    posterior weight variance 1 - 1/2 = 1/2.  All four representations
    must land on these numbers.
    """

    spec = NetworkSpec(1, (), 1)
    noise = NoiseConfig.from_scalars(1, r=1.0)
    x = np.array([1.0])
    y = np.array([1.0])
    post_mean = np.array([0.5, 0.0])
    post_cov = np.array([[0.5, 0.0], [0.0, 0.0]])

    def test_dense(self):
        b = DenseBelief(mean=np.zeros(2), cov=np.diag([1.0, 0.0]))
        new = dense_predict_update(b, self.spec, self.x, self.y, self.noise)
        assert np.allclose(new.mean, self.post_mean, atol=1e-12)
        assert np.allclose(new.cov, self.post_cov, atol=1e-12)

    def test_dense_gain(self):
        b = DenseBelief(mean=np.zeros(2), cov=np.diag([1.0, 0.0]))
        _, gains = update_obs(
            b, self.spec, np.array([1.0]), np.array([[1.0, 1.0]]),
            np.zeros((1, 0)), self.noise, return_gains=True,
        )
        assert np.allclose(gains.k_last_t, [[0.5, 0.0]], atol=1e-12)
        assert gains.k_hidden_t.shape == (1, 0)

    def test_lrkf(self):
        b = LrkfBelief(mean=np.zeros(2), w=np.array([[1.0, 0.0]]))
        new = lrkf_step(b, self.spec, self.x, self.y, self.noise)
        assert np.allclose(new.mean, self.post_mean, atol=1e-12)
        assert np.allclose(_lrkf_cov(new), self.post_cov, atol=1e-12)

    def test_hilofi(self):
        b = HiLoFiBelief(
            mean_last=np.zeros(2),
            mean_hidden=np.zeros(0),
            sigma_last_half=np.diag([1.0, 0.0]),
            c_hidden=np.zeros((0, 0)),
        )
        new = hilofi_step(b, self.spec, self.x, self.y, self.noise)
        assert np.allclose(new.mean_last, self.post_mean, atol=1e-12)
        assert np.allclose(_hilofi_last_cov(new), self.post_cov, atol=1e-12)

    def test_lolofi(self):
        b = LoLoFiBelief(
            mean_last=np.zeros(2),
            mean_hidden=np.zeros(0),
            c_last=np.array([[1.0, 0.0]]),
            c_hidden=np.zeros((0, 0)),
        )
        new = lolofi_step(b, self.spec, self.x, self.y, self.noise)
        assert np.allclose(new.mean_last, self.post_mean, atol=1e-12)
        assert np.allclose(_lolofi_last_cov(new), self.post_cov, atol=1e-12)

    def test_predictive_after_update(self):
        b = DenseBelief(mean=np.zeros(2), cov=np.diag([1.0, 0.0]))
        new = dense_predict_update(b, self.spec, self.x, self.y, self.noise)
        pred = predictive(new, self.spec, self.x, self.noise)
        assert np.allclose(pred.mean, [0.5], atol=1e-12)
        assert np.allclose(pred.epistemic, [[0.5]], atol=1e-12)
        assert np.allclose(pred.aleatoric, [[1.0]], atol=1e-12)
        assert np.allclose(pred.cov, [[1.5]], atol=1e-12)


class TestDenseAgainstReference:
    def test_trajectory_matches_textbook_recursion(self):
        """The packaged EKF and an explicit-inverse reference must agree
        step for step, including drift inflation."""
        spec = NetworkSpec(2, (4,), 1, "elu")
        rng = np.random.default_rng(101)
        params = init_params(spec, 0)
        belief = init_dense(spec, params, 1.0, 0.5)
        noise = NoiseConfig.from_scalars(1, r=0.3, q_last=0.01, q_hidden=0.001)
        split, _ = param_counts(spec)
        d_theta = params.theta.size
        q_diag = np.concatenate(
            [np.full(split, 0.001), np.full(d_theta - split, 0.01)]
        )
        mean, cov = belief.mean.copy(), belief.cov.copy()
        for _ in range(15):
            x = rng.standard_normal(2)
            y = rng.standard_normal(1)
            belief = dense_predict_update(belief, spec, x, y, noise)

            p = FlatParams(mean, split)
            jac = jacobians(spec, p, x)
            eps = y - forward(spec, p, x)
            mean, cov, _, _ = oracles.dense_kalman_step(
                mean, cov, jac.full, [[0.09]], q_diag, eps
            )
            assert np.allclose(belief.mean, mean, atol=1e-10)
            assert np.allclose(belief.cov, cov, atol=1e-10)


class TestEquivalences:
    def test_full_rank_lrkf_matches_dense(self):
        spec = NetworkSpec(2, (4,), 1, "elu")
        params = init_params(spec, 3)
        d_theta = params.theta.size
        dense = init_dense(spec, params, 1.0, 1.0)
        lrkf = init_lrkf(spec, params, 1.0, d_theta)
        noise = NoiseConfig.from_scalars(1, r=0.5)
        rng = np.random.default_rng(7)
        for _ in range(25):
            x = rng.standard_normal(2)
            y = rng.standard_normal(1)
            dense = dense_predict_update(dense, spec, x, y, noise)
            lrkf = lrkf_step(lrkf, spec, x, y, noise)
        assert np.allclose(lrkf.mean, dense.mean, atol=1e-9)
        assert np.allclose(_lrkf_cov(lrkf), dense.cov, atol=1e-9)

    def test_hidden_free_hilofi_matches_dense(self):
        # with no hidden block the low-rank machinery degenerates to an
        # exact square-root filter on eta
        spec = NetworkSpec(3, (), 2)
        params = init_params(spec, 11)
        dense = init_dense(spec, params, 2.0, 1.0)
        hilo = init_hilofi(spec, params, 2.0, 1.0, 0)
        noise = NoiseConfig.from_scalars(2, r=0.7)
        rng = np.random.default_rng(13)
        for _ in range(20):
            x = rng.standard_normal(3)
            y = rng.standard_normal(2)
            dense = dense_predict_update(dense, spec, x, y, noise)
            hilo = hilofi_step(hilo, spec, x, y, noise)
        assert np.allclose(
            np.concatenate([hilo.mean_hidden, hilo.mean_last]),
            dense.mean, atol=1e-9,
        )
        assert np.allclose(_hilofi_last_cov(hilo), dense.cov, atol=1e-9)

    def test_full_rank_lolofi_matches_hilofi(self):
        spec = NetworkSpec(2, (6,), 1, "elu")
        params = init_params(spec, 5)
        d_hidden, d_last = param_counts(spec)
        hilo = init_hilofi(spec, params, 1.0, 0.5, 4)
        lolo = init_lolofi(spec, params, 1.0, 0.5, d_last, 4)
        noise = NoiseConfig.from_scalars(1, r=0.4)
        rng = np.random.default_rng(17)
        for _ in range(30):
            x = rng.standard_normal(2)
            y = rng.standard_normal(1)
            hilo = hilofi_step(hilo, spec, x, y, noise)
            lolo = lolofi_step(lolo, spec, x, y, noise)
        assert np.allclose(lolo.mean_last, hilo.mean_last, atol=1e-6)
        assert np.allclose(lolo.mean_hidden, hilo.mean_hidden, atol=1e-6)
        assert np.allclose(
            _lolofi_last_cov(lolo), _hilofi_last_cov(hilo), atol=1e-6
        )
        assert np.allclose(
            lolo.c_hidden.T @ lolo.c_hidden,
            hilo.c_hidden.T @ hilo.c_hidden, atol=1e-6,
        )

    def test_fresh_beliefs_share_predictive(self):
        spec = NetworkSpec(2, (5,), 2, "tanh")
        params = init_params(spec, 21)
        d_hidden, d_last = param_counts(spec)
        noise = NoiseConfig.from_scalars(2, r=0.2)
        beliefs = [
            init_dense(spec, params, 0.7, 0.7),
            init_lrkf(spec, params, 0.7, d_hidden + d_last),
            init_hilofi(spec, params, 0.7, 0.7, d_hidden),
            init_lolofi(spec, params, 0.7, 0.7, d_last, d_hidden),
        ]
        x = np.array([0.3, -1.1])
        preds = [predictive(b, spec, x, noise) for b in beliefs]
        for p in preds[1:]:
            assert np.allclose(p.mean, preds[0].mean, atol=1e-12)
            assert np.allclose(p.cov, preds[0].cov, atol=1e-10)


def _all_beliefs(spec, params):
    d_hidden, d_last = param_counts(spec)
    return [
        init_dense(spec, params, 1.0, 1.0),
        init_lrkf(spec, params, 1.0, min(4, d_hidden + d_last)),
        init_hilofi(spec, params, 1.0, 1.0, min(3, d_hidden)),
        init_lolofi(spec, params, 1.0, 1.0, min(3, d_last), min(3, d_hidden)),
    ]


_STEPS = {
    DenseBelief: dense_predict_update,
    LrkfBelief: lrkf_step,
    HiLoFiBelief: hilofi_step,
    LoLoFiBelief: lolofi_step,
}


def _mean_of(belief):
    if isinstance(belief, (DenseBelief, LrkfBelief)):
        return belief.mean
    return np.concatenate([belief.mean_hidden, belief.mean_last])


class TestUpdateInvariants:
    spec = NetworkSpec(2, (4,), 2, "elu")

    def test_zero_innovation_keeps_means(self):
        params = init_params(self.spec, 2)
        noise = NoiseConfig.from_scalars(2, r=0.5, q_last=0.1, q_hidden=0.01)
        rng = np.random.default_rng(0)
        d_hidden, d_last = param_counts(self.spec)
        l_tilde = rng.standard_normal((2, d_last))
        h_tilde = rng.standard_normal((2, d_hidden))
        for b in _all_beliefs(self.spec, params):
            new = update_obs(
                b, self.spec, np.zeros(2), l_tilde, h_tilde, noise
            )
            assert np.array_equal(_mean_of(new), _mean_of(b))

    def test_observing_own_prediction_contracts(self):
        params = init_params(self.spec, 4)
        noise = NoiseConfig.from_scalars(2, r=0.5)
        x = np.array([0.4, -0.2])
        for b in _all_beliefs(self.spec, params):
            y = forward(self.spec, FlatParams(params.theta, params.split), x)
            new = _STEPS[type(b)](b, self.spec, x, y, noise)
            assert np.allclose(_mean_of(new), _mean_of(b), atol=1e-12)
        dense = _all_beliefs(self.spec, params)[0]
        y = forward(self.spec, params, x)
        new = dense_predict_update(dense, self.spec, x, y, noise)
        assert np.trace(new.cov) < np.trace(dense.cov)

    def test_huge_observation_noise_freezes_mean(self):
        params = init_params(self.spec, 6)
        noise = NoiseConfig.from_scalars(2, r=1e6)
        x = np.array([1.0, 1.0])
        y = np.array([5.0, -5.0])
        for b in _all_beliefs(self.spec, params):
            new = _STEPS[type(b)](b, self.spec, x, y, noise)
            assert np.max(np.abs(_mean_of(new) - _mean_of(b))) <= 1e-9

    def test_singular_innovation_raises(self):
        params = init_params(self.spec, 8)
        noise = NoiseConfig.from_scalars(2, r=0.0)
        d_hidden, d_last = param_counts(self.spec)
        l_tilde = np.zeros((2, d_last))
        h_tilde = np.zeros((2, d_hidden))
        for b in _all_beliefs(self.spec, params):
            with pytest.raises(np.linalg.LinAlgError):
                update_obs(b, self.spec, np.ones(2), l_tilde, h_tilde, noise)

    def test_repeated_input_variance_monotone(self):
        """Without drift, conditioning at a fixed input can only shrink the
        epistemic predictive variance there.  Uses a model that is linear
        in its parameters so the Jacobian (and hence the statement) does
        not depend on where the mean wanders."""
        spec = NetworkSpec(2, (), 2)
        params = init_params(spec, 10)
        noise = NoiseConfig.from_scalars(2, r=0.5)
        x = np.array([0.8, 0.1])
        rng = np.random.default_rng(3)
        for b in _all_beliefs(spec, params):
            prev = np.trace(predictive(b, spec, x, noise).epistemic)
            for _ in range(10):
                y = rng.standard_normal(2)
                b = _STEPS[type(b)](b, spec, x, y, noise)
                cur = np.trace(predictive(b, spec, x, noise).epistemic)
                assert cur <= prev + 1e-10
                prev = cur

    def test_gain_consistency(self):
        params = init_params(self.spec, 12)
        noise = NoiseConfig.from_scalars(2, r=0.5, q_last=0.05, q_hidden=0.01)
        rng = np.random.default_rng(9)
        d_hidden, d_last = param_counts(self.spec)
        l_tilde = rng.standard_normal((2, d_last))
        h_tilde = rng.standard_normal((2, d_hidden))
        eps = rng.standard_normal(2)
        for b in _all_beliefs(self.spec, params):
            new, gains = update_obs(
                b, self.spec, eps, l_tilde, h_tilde, noise, return_gains=True
            )
            delta = _mean_of(new) - _mean_of(b)
            assert np.allclose(delta[:d_hidden], gains.k_hidden_t.T @ eps,
                               atol=1e-12)
            assert np.allclose(delta[d_hidden:], gains.k_last_t.T @ eps,
                               atol=1e-12)


class TestPredictive:
    def test_zero_factors_zero_noise(self):
        spec = NetworkSpec(2, (3,), 1)
        params = init_params(spec, 0)
        d_hidden, d_last = param_counts(spec)
        b = LoLoFiBelief(
            mean_last=params.last.copy(),
            mean_hidden=params.hidden.copy(),
            c_last=np.zeros((1, d_last)),
            c_hidden=np.zeros((1, d_hidden)),
        )
        pred = predictive(b, spec, np.ones(2), NoiseConfig.from_scalars(1))
        assert np.array_equal(pred.cov, np.zeros((1, 1)))

    def test_aleatoric_is_noise_gram(self):
        spec = NetworkSpec(2, (3,), 2)
        params = init_params(spec, 1)
        r_half = np.array([[0.5, 0.2], [0.0, 0.3]])
        noise = NoiseConfig(r_half=r_half)
        b = init_dense(spec, params, 1.0, 1.0)
        pred = predictive(b, spec, np.ones(2), noise)
        assert np.allclose(pred.aleatoric, r_half.T @ r_half, atol=1e-15)

    def test_precomputed_jacobian_shortcut(self):
        spec = NetworkSpec(2, (4,), 2, "tanh")
        params = init_params(spec, 5)
        noise = NoiseConfig.from_scalars(2, r=0.1)
        x = np.array([0.2, 0.9])
        for b in _all_beliefs(spec, params):
            jac = jacobians(spec, params, x)
            a = predictive(b, spec, x, noise)
            c = predictive(b, spec, x, noise, jac=jac)
            assert np.array_equal(a.mean, c.mean)
            assert np.array_equal(a.epistemic, c.epistemic)

    def test_epistemic_psd(self):
        spec = NetworkSpec(2, (5,), 3, "elu")
        params = init_params(spec, 8)
        noise = NoiseConfig.from_scalars(3, r=0.3)
        rng = np.random.default_rng(2)
        for b in _all_beliefs(spec, params):
            for _ in range(3):
                b = _STEPS[type(b)](b, spec, rng.standard_normal(2),
                                    rng.standard_normal(3), noise)
            epi = predictive(b, spec, rng.standard_normal(2), noise).epistemic
            assert np.allclose(epi, epi.T)
            assert np.min(np.linalg.eigvalsh(epi)) >= -1e-12


class TestSampleFunction:
    def test_zero_factors_give_zero_delta(self):
        spec = NetworkSpec(2, (3,), 1)
        params = init_params(spec, 0)
        d_hidden, d_last = param_counts(spec)
        b = LoLoFiBelief(
            mean_last=params.last.copy(),
            mean_hidden=params.hidden.copy(),
            c_last=np.zeros((2, d_last)),
            c_hidden=np.zeros((2, d_hidden)),
        )
        delta = sample_function(b, spec, np.random.default_rng(0))
        assert np.array_equal(delta, np.zeros(d_hidden + d_last))

    @pytest.mark.parametrize("kind", ["dense", "lrkf", "hilofi", "lolofi"])
    def test_monte_carlo_covariance(self, kind):
        """The pushforward J(x) delta of sampled perturbations must have
        the predictive's epistemic covariance, jointly across two inputs."""
        spec = NetworkSpec(1, (2,), 1, "tanh")
        params = init_params(spec, 3)
        d_hidden, d_last = param_counts(spec)
        b = {
            "dense": init_dense(spec, params, 0.8, 0.4),
            "lrkf": init_lrkf(spec, params, 0.6, 3),
            "hilofi": init_hilofi(spec, params, 0.8, 0.4, 2),
            "lolofi": init_lolofi(spec, params, 0.8, 0.4, 2, 2),
        }[kind]
        noise = NoiseConfig.from_scalars(1, r=0.5)
        # a couple of updates so the covariance is not diagonal
        rng = np.random.default_rng(4)
        for _ in range(3):
            b = _STEPS[type(b)](b, spec, rng.standard_normal(1),
                                rng.standard_normal(1), noise)
        x1, x2 = np.array([0.5]), np.array([-1.2])
        # predictive() linearizes at the belief mean; do the same here
        split, _ = param_counts(spec)
        mean_params = FlatParams(_mean_of(b), split)
        j1 = jacobians(spec, mean_params, x1).full
        j2 = jacobians(spec, mean_params, x2).full
        n = 30000
        deltas = np.stack(
            [sample_function(b, spec, rng) for _ in range(n)]
        )
        push = deltas @ np.vstack([j1, j2]).T  # n x 2
        emp = push.T @ push / n
        want11 = predictive(b, spec, x1, noise, jac=jacobians(spec, mean_params, x1)).epistemic[0, 0]
        want22 = predictive(b, spec, x2, noise, jac=jacobians(spec, mean_params, x2)).epistemic[0, 0]
        assert abs(emp[0, 0] - want11) <= 0.05 * want11
        assert abs(emp[1, 1] - want22) <= 0.05 * want22
        # cross term from the shared delta
        if isinstance(b, DenseBelief):
            want12 = (j1 @ b.cov @ j2.T).item()
        elif isinstance(b, LrkfBelief):
            want12 = ((b.w @ j1.T).T @ (b.w @ j2.T)).item()
        else:
            ch = b.c_hidden
            cl = b.sigma_last_half if isinstance(b, HiLoFiBelief) else b.c_last
            want12 = (
                (cl @ j1[:, d_hidden:].T).T @ (cl @ j2[:, d_hidden:].T)
                + (ch @ j1[:, :d_hidden].T).T @ (ch @ j2[:, :d_hidden].T)
            ).item()
        scale = np.sqrt(want11 * want22)
        assert abs(emp[0, 1] - want12) <= 0.05 * scale


class TestMomentMatching:
    def test_uniform_logits(self):
        m, cov = moment_matched_obs(np.zeros(3), eps=0.01)
        assert np.allclose(m, np.full(3, 1 / 3), atol=1e-15)
        want = np.diag(np.full(3, 1 / 3)) - np.full((3, 3), 1 / 9) + 0.01 * np.eye(3)
        assert np.allclose(cov, want, atol=1e-15)

    def test_dominant_logit_floor(self):
        m, cov = moment_matched_obs(np.array([50.0, 0.0, 0.0]), eps=0.05)
        assert np.allclose(cov, 0.05 * np.eye(3), atol=1e-9)

    def test_min_eig_at_least_eps(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            logits = 3 * rng.standard_normal(4)
            _, cov = moment_matched_obs(logits, eps=1e-3)
            assert np.min(np.linalg.eigvalsh(cov)) >= 1e-3 - 1e-12

    def test_literal_sign_flips_outer_product(self):
        logits = np.array([0.4, -0.7, 1.2])
        m, cov_minus = moment_matched_obs(logits, eps=0.01)
        _, cov_plus = moment_matched_obs(logits, eps=0.01, literal_sign=True)
        assert np.allclose(cov_plus - cov_minus, 2 * np.outer(m, m), atol=1e-15)

    def test_rejects_nonpositive_eps(self):
        with pytest.raises(ValueError):
            moment_matched_obs(np.zeros(2), eps=0.0)


class TestClassificationStep:
    spec = NetworkSpec(2, (4,), 3, "elu")

    def _label_prob(self, belief, x, label):
        split, _ = param_counts(self.spec)
        logits = forward(self.spec, FlatParams(_mean_of(belief), split), x)
        return softmax(logits)[label]

    def test_observed_label_gains_probability(self):
        params = init_params(self.spec, 9)
        x = np.array([0.6, -0.4])
        for b in _all_beliefs(self.spec, params):
            before = self._label_prob(b, x, 1)
            new = classification_step(b, self.spec, x, 1, eps=0.05)
            assert self._label_prob(new, x, 1) > before

    def test_repeated_labels_accumulate(self):
        params = init_params(self.spec, 14)
        b = init_dense(self.spec, params, 1.0, 1.0)
        x = np.array([0.2, 0.2])
        before = self._label_prob(b, x, 2)
        for _ in range(5):
            b = classification_step(b, self.spec, x, 2, eps=0.05)
        assert self._label_prob(b, x, 2) > before + 0.1

    def test_literal_sign_variant_differs(self):
        params = init_params(self.spec, 16)
        b = init_dense(self.spec, params, 1.0, 1.0)
        x = np.array([0.3, 0.9])
        a = classification_step(b, self.spec, x, 0, eps=0.05)
        c = classification_step(b, self.spec, x, 0, eps=0.05, literal_sign=True)
        assert not np.allclose(a.mean, c.mean)


class TestSerialization:
    spec = NetworkSpec(2, (3,), 2)

    def _updated(self):
        params = init_params(self.spec, 1)
        noise = NoiseConfig.from_scalars(2, r=0.5)
        out = []
        rng = np.random.default_rng(6)
        for b in _all_beliefs(self.spec, params):
            out.append(_STEPS[type(b)](b, self.spec, rng.standard_normal(2),
                                       rng.standard_normal(2), noise))
        return out

    def test_round_trip_bit_exact(self, tmp_path):
        fields = {
            DenseBelief: ("mean", "cov"),
            LrkfBelief: ("mean", "w"),
            HiLoFiBelief: ("mean_last", "mean_hidden", "sigma_last_half",
                           "c_hidden"),
            LoLoFiBelief: ("mean_last", "mean_hidden", "c_last", "c_hidden"),
        }
        for i, b in enumerate(self._updated()):
            path = tmp_path / f"b{i}.json"
            save_belief(b, self.spec, path)
            loaded = load_belief(path, self.spec)
            assert type(loaded) is type(b)
            for name in fields[type(b)]:
                assert np.array_equal(getattr(loaded, name), getattr(b, name))

    def test_spec_mismatch_rejected(self, tmp_path):
        b = self._updated()[0]
        path = tmp_path / "b.json"
        save_belief(b, self.spec, path)
        other = NetworkSpec(2, (3,), 3)
        with pytest.raises(ValueError):
            load_belief(path, other)
        # no spec given -> no check
        load_belief(path)

    def test_unrecognized_file_rejected(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text('{"format": "something-else", "version": 1}')
        with pytest.raises(ValueError):
            load_belief(path)

    def test_spec_hash_distinguishes_architectures(self):
        a = spec_hash(NetworkSpec(2, (3,), 2))
        b = spec_hash(NetworkSpec(2, (3,), 2))
        c = spec_hash(NetworkSpec(2, (4,), 2, "tanh"))
        assert a == b
        assert a != c


class TestInitValidation:
    def test_lrkf_rank_range(self):
        spec = NetworkSpec(2, (3,), 1)
        params = init_params(spec, 0)
        with pytest.raises(ValueError):
            init_lrkf(spec, params, 1.0, 0)
        with pytest.raises(ValueError):
            init_lrkf(spec, params, 1.0, params.theta.size + 1)

    def test_hilofi_rank_range(self):
        spec = NetworkSpec(2, (3,), 1)
        params = init_params(spec, 0)
        with pytest.raises(ValueError):
            init_hilofi(spec, params, 1.0, 1.0, 0)  # hidden block nonempty

    def test_lolofi_last_rank_must_be_positive(self):
        spec = NetworkSpec(2, (), 1)
        params = init_params(spec, 0)
        with pytest.raises(ValueError):
            init_lolofi(spec, params, 1.0, 1.0, 0, 0)

    def test_negative_drift_rejected(self):
        with pytest.raises(ValueError):
            NoiseConfig(r_half=np.eye(1), q_last=-0.1)
