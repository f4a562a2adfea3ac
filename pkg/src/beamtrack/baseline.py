"""Comparison filter tracking the angles directly.

State x = [theta, phi, alpha_re, alpha_im] with an identity transition and
additive angle process noise of standard deviation 0.5 degrees per block.
The measurement model is the same pilot observation, expressed in the angle
cosines; the filter never sees the kinematic coupling between blocks, which
is exactly the structural handicap the comparison is meant to expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array_channel import ArrayConfig, BeamPointing
from .ekf import FilterState, stack, update

ANGLE_NOISE_STD = 0.5 * math.pi / 180.0


@dataclass(frozen=True)
class AngleState:
    """Typed view of the baseline's 4-entry state."""

    theta: float
    phi: float
    alpha_re: float
    alpha_im: float

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.phi, self.alpha_re, self.alpha_im])

    @classmethod
    def from_array(cls, x: np.ndarray) -> "AngleState":
        return cls(theta=float(x[0]), phi=float(x[1]),
                   alpha_re=float(x[2]), alpha_im=float(x[3]))

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)


def process_cov(rho: float) -> np.ndarray:
    """Additive per-block covariance: angle jitter plus gain innovation."""
    return np.diag([ANGLE_NOISE_STD ** 2, ANGLE_NOISE_STD ** 2,
                    1.0 - rho ** 2, 1.0 - rho ** 2])


def baseline_init(x0: AngleState, rho: float) -> FilterState:
    """Start the baseline at x0 with its process covariance."""
    return FilterState(x_hat=x0.as_array(), p=process_cov(rho))


def baseline_predict(fs: FilterState, rho: float) -> FilterState:
    """Identity transition: the state persists, uncertainty grows."""
    return FilterState(x_hat=fs.x_hat.copy(), p=fs.p + process_cov(rho))


def _phase_grid(x: AngleState, pointing: BeamPointing, rx: ArrayConfig,
                tx: ArrayConfig):
    kappa = rx.wavenumber_spacing
    p = np.arange(rx.n)[:, None]
    q = np.arange(tx.n)[None, :]
    phases = kappa * (p * (math.cos(pointing.theta_bar) - math.cos(x.theta))
                      + q * (math.cos(x.phi) - math.cos(pointing.phi_bar)))
    return kappa, p, q, np.exp(1j * phases)


def baseline_measurement(x: AngleState, pointing: BeamPointing,
                         rx: ArrayConfig, tx: ArrayConfig,
                         pilot: complex = 1.0) -> complex:
    """Noiseless observation as a function of the angle state."""
    if rx.spacing != tx.spacing or rx.wavelength != tx.wavelength:
        raise ValueError("shared phase scale requires identical spacing and wavelength")
    _, _, _, e = _phase_grid(x, pointing, rx, tx)
    return complex(x.alpha * pilot * e.sum() / (tx.n * rx.n))


def baseline_jacobian(x: AngleState, pointing: BeamPointing, rx: ArrayConfig,
                      tx: ArrayConfig, pilot: complex = 1.0) -> np.ndarray:
    """Row of partials [dz/dtheta, dz/dphi, dz/dalpha_re, dz/dalpha_im]."""
    if rx.spacing != tx.spacing or rx.wavelength != tx.wavelength:
        raise ValueError("shared phase scale requires identical spacing and wavelength")
    kappa, p, q, e = _phase_grid(x, pointing, rx, tx)
    coeff = x.alpha * pilot / (tx.n * rx.n)
    d_theta = coeff * 1j * kappa * math.sin(x.theta) * (p * e).sum()
    d_phi = coeff * (-1j) * kappa * math.sin(x.phi) * (q * e).sum()
    d_re = pilot * e.sum() / (tx.n * rx.n)
    return np.array([d_theta, d_phi, d_re, 1j * d_re])


def baseline_step(fs: FilterState, z_observed: complex,
                  pointing: BeamPointing, rx: ArrayConfig, tx: ArrayConfig,
                  sigma_n2: float, rho: float,
                  pilot: complex = 1.0) -> tuple[FilterState, BeamPointing]:
    """One baseline block: predict, linearize at the prediction, update.

    The next pointing is simply the updated angle estimate, since this state
    carries no motion model to propagate.
    """
    pred = baseline_predict(fs, rho)
    x_eval = AngleState.from_array(pred.x_hat)
    z_hat = baseline_measurement(x_eval, pointing, rx, tx, pilot)
    h_row = baseline_jacobian(x_eval, pointing, rx, tx, pilot)
    meas = stack(z_observed, h_row, sigma_n2)
    updated = update(pred, meas, z_hat)
    new_pointing = BeamPointing(theta_bar=float(updated.x_hat[0]),
                                phi_bar=float(updated.x_hat[1]))
    return updated, new_pointing
