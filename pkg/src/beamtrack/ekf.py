"""Extended Kalman filter over the kinematic-plus-gain state.

State vector x = [d, v, alpha_re, alpha_im]: vehicle distance, velocity, and
the complex channel gain split into real parts.  The measurement is one
complex pilot observation; it is stacked into a length-2 real vector so the
whole recursion runs in real arithmetic.

The measurement model is indexed one block back: the pilot observed at block
k depends on the distance reached from the previous state, d_prev + v_prev*dt.
The per-op signatures below therefore take the previous-block kinematic
entries and apply the one-block displacement internally; ``step`` wires this
so the evaluation distance equals the predicted position estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array_channel import ArrayConfig, BeamPointing, measure_double_sum
from .geometry import Scenario, angles_from_position


class SingularInnovationError(np.linalg.LinAlgError):
    """Raised when the 2x2 innovation matrix cannot be inverted."""


@dataclass(frozen=True)
class StateVector:
    """Typed view of the 4-entry filter state."""

    d: float
    v: float
    alpha_re: float
    alpha_im: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d, self.v, self.alpha_re, self.alpha_im])

    @classmethod
    def from_array(cls, x: np.ndarray) -> "StateVector":
        return cls(d=float(x[0]), v=float(x[1]),
                   alpha_re=float(x[2]), alpha_im=float(x[3]))

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)


@dataclass(frozen=True)
class StateTransition:
    """Constant-velocity transition with diagonal process covariance.

    ``gain_decay`` keeps the literal identity entries on the gain rows of A
    by default; switching it on multiplies them by rho instead, for
    consistency experiments against the Gauss-Markov truth.
    """

    dt: float
    rho: float
    sigma_w: float
    gain_decay: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0,1]")
        if self.sigma_w < 0:
            raise ValueError("sigma_w must be nonnegative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def a(self) -> np.ndarray:
        g = self.rho if self.gain_decay else 1.0
        return np.array([[1.0, self.dt, 0.0, 0.0],
                         [0.0, 1.0, 0.0, 0.0],
                         [0.0, 0.0, g, 0.0],
                         [0.0, 0.0, 0.0, g]])

    @property
    def sigma_u(self) -> np.ndarray:
        return np.diag([(self.dt * self.sigma_w) ** 2,
                        self.sigma_w ** 2,
                        1.0 - self.rho ** 2,
                        1.0 - self.rho ** 2])


@dataclass
class FilterState:
    """Estimate and covariance pair (x_hat, P)."""

    x_hat: np.ndarray
    p: np.ndarray

    def state_vector(self) -> StateVector:
        return StateVector.from_array(self.x_hat)


@dataclass(frozen=True)
class StackedMeasurement:
    """Real stacking of one complex observation and its Jacobian row.

    z2 = [Re z, Im z]; h2 = [Re H; Im H]; r2 = (sigma_n^2 / 2) * I, the
    per-component covariance of circularly symmetric complex noise.
    """

    z2: np.ndarray
    h2: np.ndarray
    r2: np.ndarray


def init(x0: StateVector, st: StateTransition) -> FilterState:
    """Start the filter at x0 with covariance Sigma_u."""
    return FilterState(x_hat=x0.as_array(), p=st.sigma_u.copy())


def predict(fs: FilterState, st: StateTransition) -> FilterState:
    """Time update: x' = A x, P' = A P A^T + Sigma_u."""
    a = st.a
    return FilterState(x_hat=a @ fs.x_hat, p=a @ fs.p @ a.T + st.sigma_u)


def _sum_terms(x: StateVector, pointing: BeamPointing, rx: ArrayConfig,
               tx: ArrayConfig, scenario: Scenario):
    """Phase grid shared by the measurement and its partials."""
    kappa = rx.wavenumber_spacing
    displaced = x.d + x.v * scenario.dt
    r = math.hypot(scenario.h, displaced)
    p = np.arange(rx.n)[:, None]
    q = np.arange(tx.n)[None, :]
    b = p * math.cos(pointing.theta_bar) - q * math.cos(pointing.phi_bar)
    e = np.exp(1j * kappa * ((p + q) * (displaced / r) + b))
    return kappa, r, p + q, e


def jacobian_position(x: StateVector, pointing: BeamPointing, rx: ArrayConfig,
                      tx: ArrayConfig, scenario: Scenario,
                      pilot: complex = 1.0) -> complex:
    """Closed-form partial of the observation with respect to distance.

    dz/dd = (alpha*s/(N_t*N_r)) * sum over (p,q) of
    j*kappa*(p+q)*h^2/r^3 * exp{j*kappa*[(p+q)*D/r + b_pq]}, r = sqrt(h^2+D^2).
    """
    if rx.spacing != tx.spacing or rx.wavelength != tx.wavelength:
        raise ValueError("closed-form Jacobian requires identical spacing and wavelength")
    kappa, r, pq, e = _sum_terms(x, pointing, rx, tx, scenario)
    coeff = x.alpha * pilot / (tx.n * rx.n)
    total = (pq * e).sum()
    return complex(coeff * 1j * kappa * (scenario.h ** 2 / r ** 3) * total)


def jacobian_velocity(x: StateVector, pointing: BeamPointing, rx: ArrayConfig,
                      tx: ArrayConfig, scenario: Scenario,
                      pilot: complex = 1.0) -> complex:
    """dz/dv = dt * dz/dd exactly (velocity enters only through D = d + v*dt)."""
    return scenario.dt * jacobian_position(x, pointing, rx, tx, scenario, pilot)


def jacobian_gain(x: StateVector, pointing: BeamPointing, rx: ArrayConfig,
                  tx: ArrayConfig, scenario: Scenario,
                  pilot: complex = 1.0) -> tuple[complex, complex]:
    """Partials with respect to the gain components.

    The observation is linear in alpha, so dz/dalpha_re is the double sum
    without the gain, and dz/dalpha_im is j times it.
    """
    if rx.spacing != tx.spacing or rx.wavelength != tx.wavelength:
        raise ValueError("closed-form Jacobian requires identical spacing and wavelength")
    _, _, _, e = _sum_terms(x, pointing, rx, tx, scenario)
    d_re = complex(pilot * e.sum() / (tx.n * rx.n))
    return d_re, 1j * d_re


def stack(z: complex, h_row: np.ndarray, sigma_n2: float) -> StackedMeasurement:
    """Split one complex measurement and Jacobian row into real parts."""
    h_row = np.asarray(h_row)
    return StackedMeasurement(
        z2=np.array([z.real, z.imag]),
        h2=np.vstack([h_row.real, h_row.imag]),
        r2=(sigma_n2 / 2.0) * np.eye(2),
    )


def update(fs_pred: FilterState, meas: StackedMeasurement,
           z_pred: complex) -> FilterState:
    """Measurement update with the inverse folded into S.

    S = (H P H^T + R)^-1, K = P H^T S, x+ = x + K*(z - g(x)),
    P+ = (I - K H) P followed by re-symmetrization.
    """
    h2 = meas.h2
    p = fs_pred.p
    s_raw = h2 @ p @ h2.T + meas.r2
    det = s_raw[0, 0] * s_raw[1, 1] - s_raw[0, 1] * s_raw[1, 0]
    if not math.isfinite(det) or det <= 0.0:
        raise SingularInnovationError(
            "innovation matrix is not invertible; check sigma_n2 > 0")
    s = np.array([[s_raw[1, 1], -s_raw[0, 1]],
                  [-s_raw[1, 0], s_raw[0, 0]]]) / det
    k = p @ h2.T @ s
    innovation = meas.z2 - np.array([z_pred.real, z_pred.imag])
    x_new = fs_pred.x_hat + k @ innovation
    p_new = (np.eye(4) - k @ h2) @ p
    p_new = (p_new + p_new.T) / 2.0
    return FilterState(x_hat=x_new, p=p_new)


def step(fs: FilterState, st: StateTransition, z_observed: complex,
         pointing: BeamPointing, rx: ArrayConfig, tx: ArrayConfig,
         scenario: Scenario, sigma_n2: float,
         pilot: complex = 1.0) -> tuple[FilterState, BeamPointing]:
    """One full tracking block: predict, linearize, update, re-point.

    The measurement ops take previous-block kinematic entries, so they are
    fed the pre-prediction (d, v) and the predicted gain; the evaluation
    distance then equals the predicted position.  The returned pointing is the
    updated estimate propagated one block ahead, which is the beam the next
    pilot will actually be sent on.
    """
    pred = predict(fs, st)
    x_eval = StateVector(d=float(fs.x_hat[0]), v=float(fs.x_hat[1]),
                         alpha_re=float(pred.x_hat[2]),
                         alpha_im=float(pred.x_hat[3]))
    z_hat = measure_double_sum(x_eval.alpha, x_eval.d, x_eval.v, pointing,
                               rx, tx, scenario, pilot)
    j_d = jacobian_position(x_eval, pointing, rx, tx, scenario, pilot)
    j_v = jacobian_velocity(x_eval, pointing, rx, tx, scenario, pilot)
    j_re, j_im = jacobian_gain(x_eval, pointing, rx, tx, scenario, pilot)
    h_row = np.array([j_d, j_v, j_re, j_im])
    meas = stack(z_observed, h_row, sigma_n2)
    updated = update(pred, meas, z_hat)
    ahead = float(updated.x_hat[0] + updated.x_hat[1] * st.dt)
    ang = angles_from_position(ahead, scenario)
    return updated, BeamPointing(theta_bar=ang.theta, phi_bar=ang.phi)
