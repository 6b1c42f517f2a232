from __future__ import annotations

import numpy as np
import pytest

from mot3d.errors import UpdateError
from mot3d.kalman import (
    DEFAULT_P0,
    DEFAULT_Q_INTENSITY,
    DEFAULT_R_VAR,
    FilterParams,
    FilterState,
    gain,
    init_state,
    make_filter_params,
    predict,
    update,
)

from oracles import textbook_kf_predict, textbook_kf_update

VIRCONV_D = (0.017221, 0.005901)


def _params(d_var=VIRCONV_D, **kw):
    return make_filter_params(d_var=d_var, **kw)


class TestParams:
    def test_defaults_wired_through(self):
        p = _params()
        assert np.allclose(np.diag(p.r_mat), DEFAULT_R_VAR)
        assert np.allclose(np.diag(p.d_mat), VIRCONV_D)
        assert np.allclose(
            np.diag(p.p0_mat),
            [DEFAULT_P0[0]] * 2 + [DEFAULT_P0[1]] * 2 + [DEFAULT_P0[2]] * 2,
        )

    def test_transition_structure(self):
        f = _params().f_mat
        assert f[0, 2] == f[1, 3] == f[2, 4] == f[3, 5] == 1.0
        assert f[0, 4] == f[1, 5] == 0.5
        assert np.allclose(np.diag(f), 1.0)

    def test_process_noise_scales_with_intensity(self):
        q1 = _params(q_intensity=1e-6).q_mat
        q2 = _params(q_intensity=2e-6).q_mat
        assert np.allclose(q2, 2.0 * q1)
        assert np.all(np.linalg.eigvalsh(q1) >= -1e-15)

    def test_rejects_bad_shapes(self):
        good = _params()
        with pytest.raises(ValueError):
            FilterParams(
                f_mat=np.eye(5),
                h_mat=good.h_mat,
                q_mat=good.q_mat,
                r_mat=good.r_mat,
                d_mat=good.d_mat,
                p0_mat=good.p0_mat,
            )

    def test_rejects_asymmetric_covariance(self):
        good = _params()
        bad = good.q_mat.copy()
        bad[0, 1] += 1.0
        with pytest.raises(ValueError):
            FilterParams(
                f_mat=good.f_mat,
                h_mat=good.h_mat,
                q_mat=bad,
                r_mat=good.r_mat,
                d_mat=good.d_mat,
                p0_mat=good.p0_mat,
            )

    def test_rejects_negative_definite(self):
        good = _params()
        with pytest.raises(ValueError):
            FilterParams(
                f_mat=good.f_mat,
                h_mat=good.h_mat,
                q_mat=good.q_mat,
                r_mat=-np.eye(2),
                d_mat=good.d_mat,
                p0_mat=good.p0_mat,
            )

    def test_rejects_bad_observation_rows(self):
        good = _params()
        h = np.zeros((2, 6))
        h[0, 0] = 2.0
        h[1, 1] = 1.0
        with pytest.raises(ValueError):
            FilterParams(
                f_mat=good.f_mat,
                h_mat=h,
                q_mat=good.q_mat,
                r_mat=good.r_mat,
                d_mat=good.d_mat,
                p0_mat=good.p0_mat,
            )


class TestInitState:
    def test_definition(self):
        p = _params()
        st = init_state((3.0, -2.0), p)
        assert np.array_equal(st.x_vec, [3.0, -2.0, 0, 0, 0, 0])
        assert np.array_equal(st.p_mat, p.p0_mat)

    def test_determinism(self):
        p = _params()
        a = init_state((1.0, 1.0), p)
        b = init_state((1.0, 1.0), p)
        assert np.array_equal(a.x_vec, b.x_vec)
        assert np.array_equal(a.p_mat, b.p_mat)

    def test_validate_rejects_wrong_shape(self):
        st = FilterState(x_vec=np.zeros(5), p_mat=np.eye(6))
        with pytest.raises(ValueError):
            st.validate()


class TestPredict:
    def test_constant_velocity_advance(self):
        p = _params()
        st = FilterState(x_vec=np.array([0.0, 0.0, 1.0, -2.0, 0.0, 0.0]), p_mat=p.p0_mat.copy())
        out = predict(st, p)
        assert np.allclose(out.x_vec[:2], [1.0, -2.0])

    def test_acceleration_half_step(self):
        p = _params()
        st = FilterState(x_vec=np.array([0.0, 0.0, 0.0, 0.0, 2.0, 0.0]), p_mat=p.p0_mat.copy())
        out = predict(st, p)
        assert out.x_vec[0] == pytest.approx(1.0)  # 0.5 * a
        assert out.x_vec[2] == pytest.approx(2.0)  # v + a

    def test_position_variance_strictly_grows(self):
        p = _params()
        st = init_state((0.0, 0.0), p)
        prev_x, prev_y = st.p_mat[0, 0], st.p_mat[1, 1]
        for _ in range(40):
            st = predict(st, p)
            assert st.p_mat[0, 0] > prev_x
            assert st.p_mat[1, 1] > prev_y
            prev_x, prev_y = st.p_mat[0, 0], st.p_mat[1, 1]


class TestUpdate:
    def test_zero_innovation_keeps_mean(self):
        p = _params()
        st = init_state((5.0, -1.0), p)
        out = update(st, (5.0, -1.0), p)
        assert np.allclose(out.x_vec, st.x_vec)
        assert out.p_mat[0, 0] < st.p_mat[0, 0]

    def test_one_dimensional_shrinkage_closed_form(self):
        # posterior position variance = p (r + d) / (p + r + d) per axis
        p = make_filter_params(d_var=(0.99, 0.49), r_var=0.01, q_intensity=0.0)
        st = init_state((0.0, 0.0), p)
        out = update(st, (1.0, 1.0), p)
        assert out.p_mat[0, 0] == pytest.approx(1.0 * 1.0 / 2.0, abs=1e-12)
        assert out.p_mat[1, 1] == pytest.approx(1.0 * 0.5 / 1.5, abs=1e-12)
        # gain = p / (p + r + d) on each axis
        assert out.x_vec[0] == pytest.approx(0.5, abs=1e-12)
        assert out.x_vec[1] == pytest.approx(1.0 / 1.5, abs=1e-12)

    def test_singular_innovation_raises(self):
        p = make_filter_params(d_var=(0.0, 0.0), r_var=0.0, p0=(0.0, 1.0, 1.0))
        st = init_state((0.0, 0.0), p)
        with pytest.raises(UpdateError):
            update(st, (0.0, 0.0), p)

    def test_matches_textbook_oracle_without_detector_noise(self):
        p = make_filter_params(d_var=(0.0, 0.0))
        rng = np.random.default_rng(3)
        for _ in range(50):
            st = init_state(rng.uniform(-10, 10, 2), p)
            x, cov = st.x_vec.copy(), st.p_mat.copy()
            for _ in range(30):
                if rng.random() < 0.5:
                    st = predict(st, p)
                    x, cov = textbook_kf_predict(x, cov, p.f_mat, p.q_mat)
                else:
                    z = rng.uniform(-10, 10, 2)
                    st = update(st, z, p)
                    x, cov = textbook_kf_update(x, cov, z, p.h_mat, p.r_mat)
                assert np.allclose(st.x_vec, x, atol=1e-10)
                assert np.allclose(st.p_mat, cov, atol=1e-10)

    def test_detector_noise_enters_innovation(self):
        # with D stacked on R the oracle must see R + D as its measurement noise
        p = _params()
        st = predict(init_state((0.0, 0.0), p), p)
        ours = update(st, (1.0, 1.0), p)
        x, cov = textbook_kf_update(
            st.x_vec, st.p_mat, (1.0, 1.0), p.h_mat, p.r_mat + p.d_mat
        )
        assert np.allclose(ours.x_vec, x, atol=1e-10)
        assert np.allclose(ours.p_mat, cov, atol=1e-10)


class TestCovarianceHealth:
    def test_symmetric_psd_through_random_interleavings(self):
        rng = np.random.default_rng(5)
        p = _params()
        ops = 0
        while ops < 10_000:
            st = init_state(rng.uniform(-5, 5, 2), p)
            for _ in range(50):
                if rng.random() < 0.4:
                    st = predict(st, p)
                else:
                    st = update(st, rng.uniform(-5, 5, 2), p)
                ops += 1
                assert np.array_equal(st.p_mat, st.p_mat.T)
                assert float(np.min(np.linalg.eigvalsh(st.p_mat))) >= -1e-6


class TestGainMonotonicity:
    def test_more_assumed_noise_never_raises_position_gain(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            base = float(rng.uniform(0.001, 0.05))
            st = None
            prev_kx = prev_ky = None
            for scale in (1.0, 2.0, 5.0, 20.0, 100.0):
                p = make_filter_params(d_var=(base * scale, base * scale))
                st = predict(init_state(rng.uniform(-5, 5, 2), p), p)
                k = gain(st, p)
                kx, ky = k[0, 0], k[1, 1]
                if prev_kx is not None:
                    assert kx <= prev_kx + 1e-15
                    assert ky <= prev_ky + 1e-15
                prev_kx, prev_ky = kx, ky


class TestDriftMitigation:
    def test_jitter_matched_noise_beats_zero_noise_after_coasting(self):
        # stationary object, 50 jittered observations, then 30 blind predicts;
        # the filter told about the localization noise drifts less on average
        p_with = make_filter_params(d_var=VIRCONV_D)
        p_zero = make_filter_params(d_var=(0.0, 0.0))
        stds = np.sqrt(VIRCONV_D)
        diffs = []
        for seed in range(500):
            rng = np.random.default_rng(seed)
            zs = rng.standard_normal((50, 2)) * stds
            errs = []
            for params in (p_with, p_zero):
                st = init_state(zs[0], params)
                st = predict(st, params)
                for z in zs[1:]:
                    st = update(st, z, params)
                    st = predict(st, params)
                for _ in range(29):
                    st = predict(st, params)
                errs.append(float(np.hypot(st.x_vec[0], st.x_vec[1])))
            diffs.append(errs[1] - errs[0])
        diffs = np.array(diffs)
        assert diffs.mean() > 0.0
        boot_rng = np.random.default_rng(0)
        boots = np.array([
            diffs[boot_rng.integers(0, len(diffs), len(diffs))].mean()
            for _ in range(5000)
        ])
        assert np.percentile(boots, 2.5) > 0.0
