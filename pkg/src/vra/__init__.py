"""Voltage-realizable acceleration bounds for voltage-constrained actuators.

The package computes, per control step, the interval of joint
accelerations a PMSM actuator can actually execute under its voltage
budget, combines it with discrete-time kinematic envelopes, and verifies
the resulting behavior against a built-in continuous-time plant simulator.
"""

from .actuator import (
    ActuatorPreset,
    JointParams,
    JointState,
    MotorParams,
    PRESETS,
    accel_from_current,
    current_from_accel,
    dq_voltage,
    friction,
    get_preset,
    torque_from_current,
)
from .envelope import (
    EnvelopeConfig,
    KinematicSet,
    braking_bound_from_av,
    discrete_velocity_envelope,
    kinematic_set,
    position_envelope,
    viability_lower,
    viability_upper,
)
from .feasibility import (
    ControlFrame,
    CurrentFeasibility,
    FeasibilityConfig,
    QuadCoeffs,
    VoltageResidual,
    current_feasibility,
    realizable_accel_set,
    realizable_current_set,
    solve_quadratic_set,
    steady_set,
    transient_set,
    update_residual,
    velocity_budget,
)
from .harness import (
    CommandProfile,
    ConfigError,
    MetricsReport,
    Scenario,
    boundary_window,
    load_scenario,
    near_boundary_metrics,
    realizable_fraction,
    run_experiment_suite,
    run_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .intervals import Interval, clip_to_interval
from .pipelines import (
    Controller,
    MorEnvelope,
    PipelineConfig,
    StepCommand,
    make_controller,
    mor_clip,
    nominal_voltage_norm,
    raw_step,
    vbac_step,
    vra_step,
)
from .plant import (
    MismatchConfig,
    PiGains,
    PlantSim,
    PlantState,
    Trace,
    run_episode,
    saturate_voltage,
)

__version__ = "0.1.0"
