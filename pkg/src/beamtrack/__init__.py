"""Beam tracking for a vehicle-to-overpass mmWave link.

An extended Kalman filter tracks the vehicle's distance, velocity and
complex channel gain from one pilot observation per transmission block and
re-points the transmit/receive beams each block.  The package also ships the
ground-truth scenario simulator, an angle-state comparison filter, and a
Monte Carlo harness that aggregates pointing-error RMSE curves and
loss-of-track statistics into CSV artifacts.
"""

from .array_channel import (ArrayConfig, BeamPointing, channel_matrix,
                            matched_pointing, measure_double_sum,
                            measure_inner_product, steering_vector)
from .baseline import (AngleState, baseline_init, baseline_jacobian,
                       baseline_measurement, baseline_predict, baseline_step)
from .ekf import (FilterState, SingularInnovationError, StackedMeasurement,
                  StateTransition, StateVector, init, jacobian_gain,
                  jacobian_position, jacobian_velocity, predict, stack, step,
                  update)
from .geometry import (AnglePair, Scenario, angle_delta_closed_form,
                       angles_from_position, cos_angles_from_state)
from .harness import (ExperimentConfig, MSECurve, beamwidth, emit_csv,
                      mse_curve, parse_config, preset, run_sweep, run_trial)
from .truth_sim import (NoiseParams, TrialNoise, TruthState, init_alpha,
                        make_trial_noise, observe, step_truth, trial_rng)

__version__ = "0.1.0"

__all__ = [
    "AnglePair", "AngleState", "ArrayConfig", "BeamPointing",
    "ExperimentConfig", "FilterState", "MSECurve", "NoiseParams", "Scenario",
    "SingularInnovationError", "StackedMeasurement", "StateTransition",
    "StateVector", "TrialNoise", "TruthState", "angle_delta_closed_form",
    "angles_from_position", "baseline_init", "baseline_jacobian",
    "baseline_measurement", "baseline_predict", "baseline_step", "beamwidth",
    "channel_matrix", "cos_angles_from_state", "emit_csv", "init",
    "init_alpha", "jacobian_gain", "jacobian_position", "jacobian_velocity",
    "make_trial_noise", "matched_pointing", "measure_double_sum",
    "measure_inner_product", "mse_curve", "observe", "parse_config",
    "predict", "preset", "run_sweep", "run_trial", "stack", "steering_vector",
    "step", "step_truth", "trial_rng", "update",
]
