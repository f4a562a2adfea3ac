"""Tests for the kinematic-plus-gain extended Kalman filter."""

import math

import numpy as np
import pytest

from beamtrack import ekf
from beamtrack.array_channel import (
    ArrayConfig,
    BeamPointing,
    matched_pointing,
    measure_double_sum,
    measure_inner_product,
)
from beamtrack.ekf import (
    FilterState,
    SingularInnovationError,
    StackedMeasurement,
    StateTransition,
    StateVector,
)
from beamtrack.geometry import Scenario, angles_from_position

SCENARIO = Scenario(h=3.0, dt=1e-3)
ULA16 = ArrayConfig(n=16)
DEFAULT_ST = StateTransition(dt=1e-3, rho=0.995, sigma_w=0.28)


def random_state_and_pointing(rng):
    """A state with non-negligible gain, pointed within a beamwidth of truth."""
    d = float(rng.uniform(0.5, 80.0))
    v = float(rng.uniform(0.0, 40.0))
    mag = 0.3 + float(rng.rayleigh(0.7))
    ph = float(rng.uniform(-math.pi, math.pi))
    x = StateVector(d=d, v=v, alpha_re=mag * math.cos(ph),
                    alpha_im=mag * math.sin(ph))
    ang = angles_from_position(d + v * SCENARIO.dt, SCENARIO)
    pt = BeamPointing(theta_bar=ang.theta + float(rng.uniform(-0.05, 0.05)),
                      phi_bar=ang.phi + float(rng.uniform(-0.05, 0.05)))
    return x, pt


class TestStateVector:
    def test_round_trip(self):
        x = StateVector(d=3.0, v=16.667, alpha_re=0.5, alpha_im=-0.2)
        arr = x.as_array()
        np.testing.assert_array_equal(arr, [3.0, 16.667, 0.5, -0.2])
        assert StateVector.from_array(arr) == x

    def test_alpha_property(self):
        assert StateVector(0, 0, 0.5, -0.2).alpha == 0.5 - 0.2j


class TestStateTransition:
    def test_a_matrix(self):
        a = DEFAULT_ST.a
        expected = np.array([[1.0, 1e-3, 0.0, 0.0],
                             [0.0, 1.0, 0.0, 0.0],
                             [0.0, 0.0, 1.0, 0.0],
                             [0.0, 0.0, 0.0, 1.0]])
        np.testing.assert_array_equal(a, expected)

    def test_a_matrix_with_gain_decay(self):
        st = StateTransition(dt=1e-3, rho=0.9, sigma_w=0.28, gain_decay=True)
        assert st.a[2, 2] == 0.9
        assert st.a[3, 3] == 0.9
        assert st.a[0, 1] == 1e-3

    def test_sigma_u_default_values(self):
        su = DEFAULT_ST.sigma_u
        assert su[0, 0] == pytest.approx(7.84e-8, rel=1e-12)
        assert su[1, 1] == pytest.approx(0.0784, rel=1e-12)
        assert su[2, 2] == pytest.approx(0.009975, rel=1e-10)
        assert su[3, 3] == su[2, 2]
        assert np.count_nonzero(su - np.diag(np.diag(su))) == 0

    def test_rho_one_freezes_gain_slots(self):
        su = StateTransition(dt=1e-3, rho=1.0, sigma_w=0.28).sigma_u
        assert su[2, 2] == 0.0
        assert su[3, 3] == 0.0

    def test_sigma_w_zero_freezes_kinematics(self):
        su = StateTransition(dt=1e-3, rho=0.995, sigma_w=0.0).sigma_u
        assert su[0, 0] == 0.0
        assert su[1, 1] == 0.0

    @pytest.mark.parametrize("rho", [0.0, -0.5, 1.5])
    def test_rejects_bad_rho(self, rho):
        with pytest.raises(ValueError, match=r"rho must lie in \(0,1\]"):
            StateTransition(dt=1e-3, rho=rho, sigma_w=0.28)

    def test_rejects_negative_sigma_w(self):
        with pytest.raises(ValueError, match="sigma_w"):
            StateTransition(dt=1e-3, rho=0.995, sigma_w=-0.1)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError, match="dt"):
            StateTransition(dt=0.0, rho=0.995, sigma_w=0.28)


class TestInitPredict:
    def test_init_seeds_covariance_with_process_noise(self):
        x0 = StateVector(3.0, 16.667, 1.0, 0.0)
        fs = ekf.init(x0, DEFAULT_ST)
        np.testing.assert_array_equal(fs.x_hat, x0.as_array())
        np.testing.assert_array_equal(fs.p, DEFAULT_ST.sigma_u)
        fs.p[0, 0] = 99.0
        assert DEFAULT_ST.sigma_u[0, 0] != 99.0

    def test_predict_moves_position_only(self):
        fs = FilterState(x_hat=np.array([10.0, 16.667, 1.0, 0.0]),
                         p=np.zeros((4, 4)))
        out = ekf.predict(fs, DEFAULT_ST)
        np.testing.assert_allclose(out.x_hat, [10.016667, 16.667, 1.0, 0.0],
                                   atol=1e-15)

    def test_predict_covariance_hand_case(self):
        # dt = 0.5, sigma_w = 2, rho = 1 makes A P A^T + Sigma_u small enough
        # to do on paper from P = I: kinematic block [[1.25, .5], [.5, 1]]
        # plus diag(1, 4); gain block stays the identity.
        st = StateTransition(dt=0.5, rho=1.0, sigma_w=2.0)
        fs = FilterState(x_hat=np.array([10.0, 4.0, 1.0, -1.0]), p=np.eye(4))
        out = ekf.predict(fs, st)
        np.testing.assert_allclose(out.x_hat, [12.0, 4.0, 1.0, -1.0], atol=1e-15)
        expected_p = np.array([[2.25, 0.5, 0.0, 0.0],
                               [0.5, 5.0, 0.0, 0.0],
                               [0.0, 0.0, 1.0, 0.0],
                               [0.0, 0.0, 0.0, 1.0]])
        np.testing.assert_allclose(out.p, expected_p, atol=1e-15)

    def test_state_vector_view(self):
        fs = FilterState(x_hat=np.array([1.0, 2.0, 3.0, 4.0]), p=np.eye(4))
        assert fs.state_vector() == StateVector(1.0, 2.0, 3.0, 4.0)


class TestJacobians:
    """Closed-form partials checked against central finite differences.

    The pointing is kept within about half a beamwidth of the true angles;
    far outside the main lobe both the measurement and its derivatives pass
    through deep nulls where a relative comparison is meaningless.
    """

    def test_position_partial_matches_finite_difference(self):
        # Step size balances truncation against roundoff; 3e-5 keeps the
        # worst case near 2e-7 even when the derivative sits close to a null.
        rng = np.random.default_rng(23)
        eps = 3e-5
        for _ in range(50):
            x, pt = random_state_and_pointing(rng)
            an = ekf.jacobian_position(x, pt, ULA16, ULA16, SCENARIO)
            zp = measure_double_sum(x.alpha, x.d + eps, x.v, pt, ULA16, ULA16,
                                    SCENARIO)
            zm = measure_double_sum(x.alpha, x.d - eps, x.v, pt, ULA16, ULA16,
                                    SCENARIO)
            fd = (zp - zm) / (2 * eps)
            rel = abs(fd - an) / max(abs(fd), abs(an))
            assert rel < 1e-6

    def test_velocity_partial_matches_finite_difference(self):
        # Velocity enters through v*dt, so the step is 1e3 times the
        # position step to perturb the displaced distance by the same amount.
        rng = np.random.default_rng(29)
        eps = 3e-2
        for _ in range(50):
            x, pt = random_state_and_pointing(rng)
            an = ekf.jacobian_velocity(x, pt, ULA16, ULA16, SCENARIO)
            zp = measure_double_sum(x.alpha, x.d, x.v + eps, pt, ULA16, ULA16,
                                    SCENARIO)
            zm = measure_double_sum(x.alpha, x.d, x.v - eps, pt, ULA16, ULA16,
                                    SCENARIO)
            fd = (zp - zm) / (2 * eps)
            rel = abs(fd - an) / max(abs(fd), abs(an))
            assert rel < 1e-6

    def test_velocity_partial_is_dt_times_position_partial(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            x, pt = random_state_and_pointing(rng)
            jd = ekf.jacobian_position(x, pt, ULA16, ULA16, SCENARIO)
            jv = ekf.jacobian_velocity(x, pt, ULA16, ULA16, SCENARIO)
            assert jv == SCENARIO.dt * jd

    def test_gain_partials_are_measurement_without_gain(self):
        # z is linear in alpha, so dz/dalpha_re is the unit-gain sum and
        # dz/dalpha_im is j times it.
        rng = np.random.default_rng(37)
        for _ in range(20):
            x, pt = random_state_and_pointing(rng)
            d_re, d_im = ekf.jacobian_gain(x, pt, ULA16, ULA16, SCENARIO)
            unit = measure_double_sum(1.0, x.d, x.v, pt, ULA16, ULA16, SCENARIO)
            assert d_re == pytest.approx(unit, abs=1e-14)
            assert d_im == pytest.approx(1j * unit, abs=1e-14)

    def test_gain_partials_at_matched_pointing(self):
        x = StateVector(d=20.0, v=16.667, alpha_re=0.4, alpha_im=0.9)
        pt = matched_pointing(20.0 + 16.667 * SCENARIO.dt, SCENARIO)
        d_re, d_im = ekf.jacobian_gain(x, pt, ULA16, ULA16, SCENARIO)
        assert d_re == pytest.approx(1.0 + 0j, abs=1e-12)
        assert d_im == pytest.approx(1j, abs=1e-12)

    def test_single_antenna_has_no_position_information(self):
        one = ArrayConfig(n=1)
        x = StateVector(d=5.0, v=10.0, alpha_re=1.0, alpha_im=0.5)
        jd = ekf.jacobian_position(x, BeamPointing(-2.0, 1.0), one, one, SCENARIO)
        assert jd == 0.0

    def test_pilot_scaling(self):
        x = StateVector(d=5.0, v=10.0, alpha_re=1.0, alpha_im=0.5)
        pt = BeamPointing(-2.2, 0.9)
        jd1 = ekf.jacobian_position(x, pt, ULA16, ULA16, SCENARIO)
        jd2 = ekf.jacobian_position(x, pt, ULA16, ULA16, SCENARIO, pilot=2j)
        assert jd2 == pytest.approx(2j * jd1, abs=1e-14)

    def test_mismatched_arrays_rejected(self):
        x = StateVector(d=5.0, v=10.0, alpha_re=1.0, alpha_im=0.5)
        with pytest.raises(ValueError, match="identical spacing"):
            ekf.jacobian_position(x, BeamPointing(-2.0, 1.0),
                                  ArrayConfig(n=4, spacing=0.5),
                                  ArrayConfig(n=4, spacing=0.25), SCENARIO)


class TestStack:
    def test_example(self):
        meas = ekf.stack(1 + 2j, np.array([1j, 2, 3, 4j]), 0.5)
        np.testing.assert_array_equal(meas.z2, [1.0, 2.0])
        np.testing.assert_array_equal(meas.h2, [[0.0, 2.0, 3.0, 0.0],
                                                [1.0, 0.0, 0.0, 4.0]])
        np.testing.assert_allclose(meas.r2, 0.25 * np.eye(2), atol=1e-15)

    def test_stacked_row_reproduces_complex_product(self):
        # For real state perturbations, h2 @ dx must be the stacked H @ dx.
        rng = np.random.default_rng(41)
        for _ in range(20):
            h_row = rng.normal(size=4) + 1j * rng.normal(size=4)
            dx = rng.normal(size=4)
            meas = ekf.stack(0j, h_row, 1.0)
            complex_out = h_row @ dx
            np.testing.assert_allclose(meas.h2 @ dx,
                                       [complex_out.real, complex_out.imag],
                                       atol=1e-12)


class TestUpdate:
    def test_zero_sensitivity_leaves_state_alone(self):
        fs = FilterState(x_hat=np.array([3.0, 16.0, 1.0, 0.0]),
                         p=np.diag([1.0, 2.0, 3.0, 4.0]))
        meas = StackedMeasurement(z2=np.array([5.0, -5.0]),
                                  h2=np.zeros((2, 4)), r2=np.eye(2))
        out = ekf.update(fs, meas, 0j)
        np.testing.assert_array_equal(out.x_hat, fs.x_hat)
        np.testing.assert_allclose(out.p, fs.p, atol=1e-15)

    def test_zero_innovation_keeps_estimate(self):
        fs = FilterState(x_hat=np.array([3.0, 16.0, 1.0, 0.0]),
                         p=np.diag([1.0, 2.0, 3.0, 4.0]))
        h_row = np.array([1.0 + 1j, 0.5, 1.0, 1j])
        meas = ekf.stack(0.7 - 0.2j, h_row, 1.0)
        out = ekf.update(fs, meas, 0.7 - 0.2j)
        np.testing.assert_allclose(out.x_hat, fs.x_hat, atol=1e-14)
        # information was still gained, so the covariance must not grow
        eig = np.linalg.eigvalsh(fs.p - out.p)
        assert eig.min() > -1e-12

    def test_scalar_hand_case(self):
        # Classic one-dimensional check: x = 2, P = 4, H = 0.5, R = 1, z = 3
        # gives S = 2, K = 1, x+ = 4, P+ = 2.  Embedded in the stacked form
        # with an inert second row.
        fs = FilterState(x_hat=np.array([2.0, 0.0, 0.0, 0.0]),
                         p=np.diag([4.0, 0.0, 0.0, 0.0]))
        meas = StackedMeasurement(z2=np.array([3.0, 0.0]),
                                  h2=np.array([[0.5, 0.0, 0.0, 0.0],
                                               [0.0, 0.0, 0.0, 0.0]]),
                                  r2=np.eye(2))
        out = ekf.update(fs, meas, 1.0 + 0j)
        assert out.x_hat[0] == pytest.approx(4.0, abs=1e-14)
        assert out.p[0, 0] == pytest.approx(2.0, abs=1e-14)

    def test_matches_reference_solve(self):
        # The closed-form 2x2 inverse against numpy's general-purpose path.
        rng = np.random.default_rng(43)
        for _ in range(50):
            a = rng.normal(size=(4, 4))
            p = a @ a.T + 0.1 * np.eye(4)
            fs = FilterState(x_hat=rng.normal(size=4), p=p)
            h_row = rng.normal(size=4) + 1j * rng.normal(size=4)
            z = complex(rng.normal(), rng.normal())
            z_pred = complex(rng.normal(), rng.normal())
            sigma_n2 = float(rng.uniform(0.1, 2.0))
            meas = ekf.stack(z, h_row, sigma_n2)
            out = ekf.update(fs, meas, z_pred)

            s = meas.h2 @ p @ meas.h2.T + meas.r2
            k = p @ meas.h2.T @ np.linalg.inv(s)
            x_ref = fs.x_hat + k @ (meas.z2 - np.array([z_pred.real, z_pred.imag]))
            p_ref = (np.eye(4) - k @ meas.h2) @ p
            p_ref = (p_ref + p_ref.T) / 2.0
            np.testing.assert_allclose(out.x_hat, x_ref, atol=1e-10)
            np.testing.assert_allclose(out.p, p_ref, atol=1e-10)

    def test_result_is_symmetric(self):
        rng = np.random.default_rng(47)
        a = rng.normal(size=(4, 4))
        fs = FilterState(x_hat=np.zeros(4), p=a @ a.T + 0.1 * np.eye(4))
        meas = ekf.stack(1 + 1j, rng.normal(size=4) + 1j * rng.normal(size=4), 0.5)
        out = ekf.update(fs, meas, 0j)
        np.testing.assert_array_equal(out.p, out.p.T)

    def test_singular_innovation_raises(self):
        fs = FilterState(x_hat=np.zeros(4), p=np.zeros((4, 4)))
        meas = StackedMeasurement(z2=np.zeros(2), h2=np.zeros((2, 4)),
                                  r2=np.zeros((2, 2)))
        with pytest.raises(SingularInnovationError):
            ekf.update(fs, meas, 0j)

    def test_nonfinite_innovation_raises(self):
        fs = FilterState(x_hat=np.zeros(4), p=np.eye(4))
        meas = StackedMeasurement(z2=np.zeros(2),
                                  h2=np.full((2, 4), np.nan), r2=np.eye(2))
        with pytest.raises(SingularInnovationError):
            ekf.update(fs, meas, 0j)

    def test_error_type_is_linalg_error(self):
        assert issubclass(SingularInnovationError, np.linalg.LinAlgError)


class TestStep:
    def test_huge_noise_reduces_to_prediction(self):
        fs = ekf.init(StateVector(3.0, 16.667, 1.0, 0.0), DEFAULT_ST)
        pt = matched_pointing(3.0, SCENARIO)
        out, _ = ekf.step(fs, DEFAULT_ST, 0.5 + 0.5j, pt, ULA16, ULA16,
                          SCENARIO, sigma_n2=1e12)
        pred = ekf.predict(fs, DEFAULT_ST)
        np.testing.assert_allclose(out.x_hat, pred.x_hat, atol=1e-6)
        np.testing.assert_allclose(out.p, pred.p, atol=1e-6)

    def test_returned_pointing_tracks_updated_estimate(self):
        fs = ekf.init(StateVector(3.0, 16.667, 1.0, 0.0), DEFAULT_ST)
        pt = matched_pointing(3.0 + 16.667e-3, SCENARIO)
        out, new_pt = ekf.step(fs, DEFAULT_ST, 1.0 + 0j, pt, ULA16, ULA16,
                               SCENARIO, sigma_n2=1.0)
        ahead = float(out.x_hat[0] + out.x_hat[1] * SCENARIO.dt)
        ang = angles_from_position(ahead, SCENARIO)
        assert new_pt.theta_bar == ang.theta
        assert new_pt.phi_bar == ang.phi
        assert abs(new_pt.phi_bar + abs(new_pt.theta_bar) - math.pi) < 1e-12

    def test_noise_free_tracking_is_exact(self):
        # With no process or measurement noise and an exact start the beam
        # never leaves the vehicle: pointing error stays below a microradian.
        st = StateTransition(dt=1e-3, rho=0.995, sigma_w=0.0)
        d, v = 3.0, 16.667
        alpha = 0.6 + 0.8j
        fs = ekf.init(StateVector(d, v, alpha.real, alpha.imag), st)
        pt = matched_pointing(d + v * st.dt, SCENARIO)
        for _ in range(100):
            d += v * st.dt
            alpha = st.rho * alpha
            ang = angles_from_position(d, SCENARIO)
            err = abs(pt.phi_bar - ang.phi)
            assert err < 1e-6
            z = measure_inner_product(alpha, ang.theta, ang.phi, pt, ULA16, ULA16)
            fs, pt = ekf.step(fs, st, z, pt, ULA16, ULA16, SCENARIO, sigma_n2=0.0)

    def test_one_step_position_recovery_with_known_gain(self):
        # A millimeter of position error and an exactly known gain: one
        # near-noiseless pilot should collapse the error by orders of
        # magnitude (measured ratio is about 3e-4; asserted loosely).
        st = StateTransition(dt=1e-3, rho=1.0, sigma_w=0.0)
        d_true, d_est, v = 3.001, 3.000, 16.667
        alpha = 1.0 + 0j
        fs = FilterState(x_hat=np.array([d_est, v, alpha.real, alpha.imag]),
                         p=np.diag([1e-4, 1e-6, 0.0, 0.0]))
        pt = matched_pointing(d_est + v * st.dt, SCENARIO)
        d1 = d_true + v * st.dt
        ang = angles_from_position(d1, SCENARIO)
        z = measure_inner_product(alpha, ang.theta, ang.phi, pt, ULA16, ULA16)
        out, _ = ekf.step(fs, st, z, pt, ULA16, ULA16, SCENARIO, sigma_n2=1e-10)
        prior_err = abs((d_est + v * st.dt) - d1)
        post_err = abs(out.x_hat[0] - d1)
        assert post_err < 0.01 * prior_err

    def test_covariance_stays_symmetric_psd_under_random_driving(self):
        rng = np.random.default_rng(53)
        for _ in range(10):
            fs = ekf.init(StateVector(float(rng.uniform(2.0, 30.0)), 16.667,
                                      1.0, 0.0), DEFAULT_ST)
            pt = matched_pointing(float(fs.x_hat[0]), SCENARIO)
            for _ in range(200):
                z = complex(rng.normal(), rng.normal())
                fs, pt = ekf.step(fs, DEFAULT_ST, z, pt, ULA16, ULA16,
                                  SCENARIO, sigma_n2=1.0)
                np.testing.assert_array_equal(fs.p, fs.p.T)
                assert np.linalg.eigvalsh(fs.p).min() > -1e-10
