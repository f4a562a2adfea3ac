"""Uniform linear arrays, the single-path channel, and the pilot measurement.

The measurement of one pilot through transmit beamformer f(phi_bar) and
receive combiner w(theta_bar) is available in two algebraically identical
forms: the inner product through the rank-one channel, and the expanded
double sum over antenna index pairs written directly in the kinematic
variables.  The second form is what the tracking filter differentiates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Scenario, angles_from_position

# complex channel gains are plain Python/numpy complex scalars: alpha_re is
# alpha.real and alpha_im is alpha.imag throughout.


@dataclass(frozen=True)
class ArrayConfig:
    """One ULA: element count, element spacing and carrier wavelength.

    Attributes:
        n: antenna count, >= 1.
        spacing: element spacing, meters.
        wavelength: carrier wavelength, meters.
    """

    n: int
    spacing: float = 0.5
    wavelength: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def wavenumber_spacing(self) -> float:
        """2*pi*spacing/wavelength, the per-element phase scale (pi at lambda/2)."""
        return 2.0 * math.pi * self.spacing / self.wavelength


@dataclass(frozen=True)
class BeamPointing:
    """Pointing directions of the receive combiner and transmit beamformer."""

    theta_bar: float
    phi_bar: float


def steering_vector(angle: float, cfg: ArrayConfig) -> np.ndarray:
    """Unit-norm ULA response toward ``angle``.

    Entry p is (1/sqrt(n)) * exp(-j * (2*pi/lambda) * spacing * p * cos(angle)).
    """
    p = np.arange(cfg.n)
    phase = -cfg.wavenumber_spacing * math.cos(angle)
    return np.exp(1j * phase * p) / math.sqrt(cfg.n)


def channel_matrix(gain: complex, theta: float, phi: float,
                   rx: ArrayConfig, tx: ArrayConfig) -> np.ndarray:
    """Rank-one line-of-sight channel alpha * a_r(theta) a_t(phi)^H."""
    a_r = steering_vector(theta, rx)
    a_t = steering_vector(phi, tx)
    return gain * np.outer(a_r, a_t.conj())


def measure_inner_product(gain: complex, theta: float, phi: float,
                          pointing: BeamPointing, rx: ArrayConfig,
                          tx: ArrayConfig, pilot: complex = 1.0) -> complex:
    """Noiseless pilot observation w^H(theta_bar) H f(phi_bar) s.

    At matched pointing this collapses to exactly ``gain * pilot``.
    """
    w = steering_vector(pointing.theta_bar, rx)
    f = steering_vector(pointing.phi_bar, tx)
    h = channel_matrix(gain, theta, phi, rx, tx)
    return complex(w.conj() @ h @ f * pilot)


def measure_double_sum(gain: complex, d_prev: float, v_prev: float,
                       pointing: BeamPointing, rx: ArrayConfig,
                       tx: ArrayConfig, scenario: Scenario,
                       pilot: complex = 1.0) -> complex:
    """The same observation expanded as a double sum in the kinematic state.

    g(x) = (alpha*s/(N_t*N_r)) * sum_q sum_p exp{ j*(2*pi*spacing/lambda) *
    [ (p+q)*D/sqrt(h^2+D^2) + b_pq ] } with D = d_prev + v_prev*dt and
    b_pq = p*cos(theta_bar) - q*cos(phi_bar).  Requires both arrays to share
    spacing and wavelength, since a single phase scale appears in the sum.
    """
    if rx.spacing != tx.spacing or rx.wavelength != tx.wavelength:
        raise ValueError("double-sum form requires identical spacing and wavelength")
    kappa = rx.wavenumber_spacing
    displaced = d_prev + v_prev * scenario.dt
    c = displaced / math.hypot(scenario.h, displaced)
    p = np.arange(rx.n)[:, None]
    q = np.arange(tx.n)[None, :]
    b = p * math.cos(pointing.theta_bar) - q * math.cos(pointing.phi_bar)
    phases = kappa * ((p + q) * c + b)
    total = np.exp(1j * phases).sum()
    return complex(gain * pilot * total / (tx.n * rx.n))


def matched_pointing(d: float, scenario: Scenario) -> BeamPointing:
    """Pointing aligned with the exact angles of horizontal distance ``d``."""
    ang = angles_from_position(d, scenario)
    return BeamPointing(theta_bar=ang.theta, phi_bar=ang.phi)
