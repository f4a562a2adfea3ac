"""Ground-truth scenario generator.

Kinematics share one velocity kick per block between position and velocity
(d' = d + v*dt + w*dt, v' = v + w), the complex gain follows a first-order
Gauss-Markov process with correlation rho, and observations add circularly
symmetric complex noise to the pilot measurement.

Every trial owns an independent, reproducible RNG stream derived from
(seed, trial_index), so trials can run concurrently and in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array_channel import ArrayConfig, BeamPointing, measure_inner_product
from .geometry import Scenario, angles_from_position


@dataclass(frozen=True)
class TruthState:
    """Actual vehicle distance, velocity, channel gain and block index."""

    d: float
    v: float
    alpha: complex
    k: int = 0


@dataclass(frozen=True)
class NoiseParams:
    """Process and measurement noise levels.

    Attributes:
        sigma_w: velocity noise standard deviation, m/s per block.
        sigma_n2: measurement noise variance sigma_n^2; the convention
            SNR = 1/sigma_n2 makes the quoted SNR the ratio of the mean
            matched-beam signal power E[|alpha|^2] = 1 to the noise power.
        rho: Gauss-Markov correlation of the gain, in (0, 1].
    """

    sigma_w: float
    sigma_n2: float
    rho: float

    def __post_init__(self) -> None:
        if self.sigma_w < 0:
            raise ValueError("sigma_w must be nonnegative")
        if not self.sigma_n2 > 0:
            raise ValueError("sigma_n2 must be positive")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0,1]")


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial, stable across worker layouts."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(trial_index,)))


def init_alpha(rng: np.random.Generator) -> complex:
    """Draw the initial gain; each component is N(0, 1/2) so E[|alpha|^2] = 1."""
    scale = math.sqrt(0.5)
    re = rng.normal(0.0, scale)
    im = rng.normal(0.0, scale)
    return complex(re, im)


def step_truth(ts: TruthState, noise: NoiseParams, scenario: Scenario,
               rng: np.random.Generator) -> TruthState:
    """Advance the truth one block.

    One shared velocity kick w ~ N(0, sigma_w^2) moves both position and
    velocity; the gain components receive independent innovations of
    variance (1 - rho^2)/2, which keeps E[|alpha|^2] stationary at 1.
    """
    w = rng.normal(0.0, noise.sigma_w)
    xi_scale = math.sqrt((1.0 - noise.rho ** 2) / 2.0)
    xi1 = rng.normal(0.0, xi_scale)
    xi2 = rng.normal(0.0, xi_scale)
    return TruthState(
        d=ts.d + ts.v * scenario.dt + w * scenario.dt,
        v=ts.v + w,
        alpha=complex(noise.rho * ts.alpha.real + xi1,
                      noise.rho * ts.alpha.imag + xi2),
        k=ts.k + 1,
    )


def observe(ts: TruthState, pointing: BeamPointing, rx: ArrayConfig,
            tx: ArrayConfig, scenario: Scenario, noise: NoiseParams,
            rng: np.random.Generator, pilot: complex = 1.0) -> complex:
    """One noisy pilot observation at the truth's exact angles."""
    ang = angles_from_position(ts.d, scenario)
    clean = measure_inner_product(ts.alpha, ang.theta, ang.phi, pointing,
                                  rx, tx, pilot)
    n_scale = math.sqrt(noise.sigma_n2 / 2.0)
    n_re = rng.normal(0.0, n_scale)
    n_im = rng.normal(0.0, n_scale)
    return clean + complex(n_re, n_im)


@dataclass(frozen=True)
class TrialNoise:
    """All random draws of one trial, materialized up front.

    Drawing everything in a fixed order (initial gain components, then the
    per-block arrays w, xi1, xi2, n_re, n_im) makes a trial's randomness a
    pure function of (seed, trial_index, n_blocks), independent of which
    filter consumes it or on which worker it runs.
    """

    alpha_re0: float
    alpha_im0: float
    w: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    n_re: np.ndarray
    n_im: np.ndarray


def make_trial_noise(seed: int, trial_index: int, n_blocks: int,
                     noise: NoiseParams) -> TrialNoise:
    """Draw the complete noise record for one trial."""
    rng = trial_rng(seed, trial_index)
    scale0 = math.sqrt(0.5)
    alpha_re0 = rng.normal(0.0, scale0)
    alpha_im0 = rng.normal(0.0, scale0)
    xi_scale = math.sqrt((1.0 - noise.rho ** 2) / 2.0)
    n_scale = math.sqrt(noise.sigma_n2 / 2.0)
    return TrialNoise(
        alpha_re0=alpha_re0,
        alpha_im0=alpha_im0,
        w=rng.normal(0.0, noise.sigma_w, n_blocks),
        xi1=rng.normal(0.0, xi_scale, n_blocks),
        xi2=rng.normal(0.0, xi_scale, n_blocks),
        n_re=rng.normal(0.0, n_scale, n_blocks),
        n_im=rng.normal(0.0, n_scale, n_blocks),
    )
