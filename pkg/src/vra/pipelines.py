"""Per-step controllers: the voltage-realizable pipeline and its baselines.

The realizable pipeline runs a fixed order every step: residual update,
realizable current set, its acceleration image, braking bound, kinematic
envelope, intersection, clip, and a final projection of the commanded
current back onto the realizable set. The baselines clip against the
kinematic envelope alone (optionally followed by an operating-region
torque clamp) and never consult voltage feasibility for their command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .actuator import (
    JointParams,
    MotorParams,
    accel_from_current,
    current_from_accel,
)
from .envelope import (
    EnvelopeConfig,
    KinematicSet,
    braking_bound_from_av,
    kinematic_set,
)
from .feasibility import (
    ControlFrame,
    CurrentFeasibility,
    FeasibilityConfig,
    VoltageResidual,
    current_feasibility,
    realizable_accel_set,
    update_residual,
)
from .intervals import Interval, clip_to_interval

CONTROLLER_IDS = ("vra", "vbac-ab", "vbac-cb", "vbac-mor", "raw")


@dataclass(frozen=True)
class MorEnvelope:
    """Speed-dependent linear torque boundary of the motor operating region.

    Identified at v_ref; at another bus voltage the whole boundary is
    uniformly scaled by sigma = v_bus / v_ref in both the torque and speed
    axes.
    """

    tau_max: float   # peak torque of the plateau [Nm]
    omega_c: float   # corner speed where derating starts [rad/s]
    omega_max: float  # zero-torque speed [rad/s]
    v_ref: float     # identification voltage [V]

    def __post_init__(self):
        if not 0.0 < self.omega_c < self.omega_max:
            raise ValueError("MorEnvelope requires 0 < omega_c < omega_max")
        if not self.tau_max > 0.0:
            raise ValueError("MorEnvelope.tau_max must be strictly positive")
        if not self.v_ref > 0.0:
            raise ValueError("MorEnvelope.v_ref must be strictly positive")

    @staticmethod
    def from_motor(m: MotorParams, i_max: float, v_ref: float = 48.0) -> "MorEnvelope":
        """Theoretical boundary of a motor at the identification voltage."""
        tau_max = m.k_t * i_max
        omega_max = v_ref / (m.p * m.phi)
        omega_c = max(1e-6, (v_ref - m.r_s * i_max) / (m.p * m.phi))
        if omega_c >= omega_max:
            omega_c = 0.9 * omega_max
        return MorEnvelope(tau_max, omega_c, omega_max, v_ref)


def mor_clip(tau: float, qd: float, mor: MorEnvelope, v_bus: float) -> float:
    """Clamp a torque command to the voltage-scaled operating region.

    Scaling is uniform in both axes: at sigma = v_bus / v_ref the boundary
    is sigma * f(|qd| / sigma) with f the identified torque-speed line.
    Four-quadrant symmetric.
    """
    sigma = v_bus / mor.v_ref
    w = abs(qd) / sigma
    if w <= mor.omega_c:
        tau_lim = sigma * mor.tau_max
    elif w >= mor.omega_max:
        tau_lim = 0.0
    else:
        tau_lim = sigma * mor.tau_max * (mor.omega_max - w) / (mor.omega_max - mor.omega_c)
    return min(max(tau, -tau_lim), tau_lim)


@dataclass(frozen=True)
class StepDiagnostics:
    """Everything a step computed, for the trace and for offline audits."""

    residual: VoltageResidual
    feas: CurrentFeasibility | None
    a_v: Interval
    qdd_brake: float
    kin: KinematicSet | None
    a_cmd: Interval
    projected: bool
    empty_iset: bool
    empty_acmd: bool
    out_of_box: bool
    reason: str

    def flags_word(self) -> int:
        """Bit-packed flags: 1 projected, 2 empty command set, 4 empty
        current set, 8 out-of-box."""
        word = 0
        if self.projected:
            word |= 1
        if self.empty_acmd:
            word |= 2
        if self.empty_iset:
            word |= 4
        if self.out_of_box:
            word |= 8
        return word


@dataclass(frozen=True)
class StepCommand:
    iq_cmd: float    # projected q-axis current command [A]
    qdd_cmd: float   # acceleration consistent with iq_cmd [rad/s^2]
    diag: StepDiagnostics


@dataclass(frozen=True)
class PipelineConfig:
    envelope: EnvelopeConfig
    feas: FeasibilityConfig = field(default_factory=FeasibilityConfig)
    mor: MorEnvelope | None = None  # vbac-mor only


_PROJ_TOL = 1e-12


def vra_step(
    desired_qdd: float,
    frame: ControlFrame,
    m: MotorParams,
    j: JointParams,
    cfg: PipelineConfig,
    residual_prev: VoltageResidual | None = None,
) -> StepCommand:
    """One step of the voltage-realizable acceleration pipeline.

    The computation order is fixed: the realizable current set is built
    before any kinematic reasoning, so the braking bound fed to the
    envelope is already voltage-feasible, and the final command is
    projected back onto the current set so model discrepancies absorbed by
    the residual cannot push the emitted current outside it.
    """
    residual = update_residual(m, frame, residual_prev, cfg.feas.residual_alpha)
    feas = current_feasibility(m, j, frame, residual, cfg.feas)
    qd = frame.qd_prev

    if feas.iset.empty:
        # No realizable current at all: emit the least-violating singleton.
        iq_cmd = feas.least_violating_current()
        qdd_cmd = accel_from_current(m, j, iq_cmd, qd)
        diag = StepDiagnostics(
            residual=residual,
            feas=feas,
            a_v=Interval.empty_set(),
            qdd_brake=0.0,
            kin=None,
            a_cmd=Interval.empty_set(),
            projected=True,
            empty_iset=True,
            empty_acmd=True,
            out_of_box=False,
            reason=feas.reason,
        )
        return StepCommand(iq_cmd, qdd_cmd, diag)

    a_v = realizable_accel_set(feas.iset, m, j, qd)
    qdd_brake = braking_bound_from_av(a_v, qd)
    kin = kinematic_set(frame.q_prev, qd, qdd_brake, cfg.envelope, j, mode="vra")
    a_cmd = a_v.intersect(kin.interval)

    if a_cmd.empty:
        # Kinematics and actuation disagree: brake toward safety.
        qdd_cmd = kin.fallback if kin.fallback is not None else qdd_brake
        qdd_cmd = a_v.clip(qdd_cmd)
        empty_acmd = True
    else:
        qdd_cmd = a_cmd.clip(desired_qdd)
        empty_acmd = False

    iq_cmd = feas.iset.clip(current_from_accel(m, j, qdd_cmd, qd))
    qdd_out = accel_from_current(m, j, iq_cmd, qd)
    projected = abs(qdd_out - desired_qdd) > _PROJ_TOL * max(1.0, abs(desired_qdd))

    diag = StepDiagnostics(
        residual=residual,
        feas=feas,
        a_v=a_v,
        qdd_brake=qdd_brake,
        kin=kin,
        a_cmd=a_cmd,
        projected=projected,
        empty_iset=False,
        empty_acmd=empty_acmd,
        out_of_box=kin.out_of_box,
        reason=feas.reason,
    )
    return StepCommand(iq_cmd, qdd_out, diag)


def vbac_step(
    desired_qdd: float,
    frame: ControlFrame,
    m: MotorParams,
    j: JointParams,
    cfg: PipelineConfig,
    residual_prev: VoltageResidual | None = None,
) -> StepCommand:
    """Constant-bound kinematic baseline, blind to voltage feasibility.

    Clips the desired acceleration into the discrete-time envelope built
    from the configured constant braking bounds, converts through inverse
    dynamics and emits. Voltage feasibility sets are still evaluated, but
    only as shadow diagnostics for offline realizability audits.
    """
    residual = update_residual(m, frame, residual_prev, cfg.feas.residual_alpha)
    feas = current_feasibility(m, j, frame, residual, cfg.feas)
    qd = frame.qd_prev
    a_v = (
        realizable_accel_set(feas.iset, m, j, qd)
        if not feas.iset.empty
        else Interval.empty_set()
    )

    qdd_brake = cfg.envelope.qdd_const_lb if qd >= 0.0 else cfg.envelope.qdd_const_ub
    kin = kinematic_set(frame.q_prev, qd, qdd_brake, cfg.envelope, j, mode="vbac")
    const_box = Interval(cfg.envelope.qdd_const_lb, cfg.envelope.qdd_const_ub)
    a_cmd = kin.interval.intersect(const_box)

    if a_cmd.empty:
        qdd_cmd = kin.fallback if kin.fallback is not None else qdd_brake
        empty_acmd = True
    else:
        qdd_cmd = a_cmd.clip(desired_qdd)
        empty_acmd = False

    iq_cmd = current_from_accel(m, j, qdd_cmd, qd)
    if cfg.mor is not None:
        tau = mor_clip(m.k_t * iq_cmd, qd, cfg.mor, m.v_bus)
        iq_cmd = tau / m.k_t
    qdd_out = accel_from_current(m, j, iq_cmd, qd)
    projected = abs(qdd_out - desired_qdd) > _PROJ_TOL * max(1.0, abs(desired_qdd))

    diag = StepDiagnostics(
        residual=residual,
        feas=feas,
        a_v=a_v,
        qdd_brake=qdd_brake,
        kin=kin,
        a_cmd=a_cmd,
        projected=projected,
        empty_iset=feas.iset.empty,
        empty_acmd=empty_acmd,
        out_of_box=kin.out_of_box,
        reason=feas.reason,
    )
    return StepCommand(iq_cmd, qdd_out, diag)


def raw_step(
    desired_qdd: float,
    frame: ControlFrame,
    m: MotorParams,
    j: JointParams,
    cfg: PipelineConfig,
    residual_prev: VoltageResidual | None = None,
) -> StepCommand:
    """Pass the desired acceleration straight through inverse dynamics."""
    residual = update_residual(m, frame, residual_prev, cfg.feas.residual_alpha)
    feas = current_feasibility(m, j, frame, residual, cfg.feas)
    qd = frame.qd_prev
    a_v = (
        realizable_accel_set(feas.iset, m, j, qd)
        if not feas.iset.empty
        else Interval.empty_set()
    )
    iq_cmd = current_from_accel(m, j, desired_qdd, qd)
    diag = StepDiagnostics(
        residual=residual,
        feas=feas,
        a_v=a_v,
        qdd_brake=0.0,
        kin=None,
        a_cmd=Interval.full(),
        projected=False,
        empty_iset=feas.iset.empty,
        empty_acmd=False,
        out_of_box=False,
        reason=feas.reason,
    )
    return StepCommand(iq_cmd, desired_qdd, diag)


class Controller:
    """Stateful wrapper owning the residual filter state for one joint."""

    def __init__(
        self,
        controller_id: str,
        m: MotorParams,
        j: JointParams,
        cfg: PipelineConfig,
    ):
        if controller_id not in CONTROLLER_IDS:
            raise ValueError(
                f"unknown controller {controller_id!r} (known: {CONTROLLER_IDS})"
            )
        self.controller_id = controller_id
        self.m = m
        self.j = j
        self.cfg = cfg
        self._residual: VoltageResidual | None = None
        if controller_id == "vra":
            self._step_fn = vra_step
        elif controller_id == "raw":
            self._step_fn = raw_step
        else:
            self._step_fn = vbac_step

    def reset(self) -> None:
        self._residual = None

    def step(self, desired_qdd: float, frame: ControlFrame) -> StepCommand:
        cmd = self._step_fn(
            desired_qdd, frame, self.m, self.j, self.cfg, self._residual
        )
        self._residual = cmd.diag.residual
        return cmd


def make_controller(
    controller_id: str,
    m: MotorParams,
    j: JointParams,
    envelope: EnvelopeConfig,
    feas: FeasibilityConfig | None = None,
    mor: MorEnvelope | None = None,
    i_max: float | None = None,
) -> Controller:
    """Build a controller by id, deriving variant-specific configuration.

    vbac-ab / vbac-cb use the envelope's constant bounds as configured;
    vbac-mor additionally clamps torque to the operating region. The vra
    pipeline ignores the constant bounds entirely.
    """
    if feas is None:
        feas = FeasibilityConfig(i_max=i_max if i_max is not None else 60.0)
    if controller_id == "vbac-mor" and mor is None:
        mor = MorEnvelope.from_motor(m, feas.i_max)
    if controller_id != "vbac-mor":
        mor = None
    cfg = PipelineConfig(envelope=envelope, feas=feas, mor=mor)
    return Controller(controller_id, m, j, cfg)


def clip_acceleration(x: float, iv: Interval) -> float:
    """Alias of interval clipping with the pipeline's error contract."""
    return clip_to_interval(x, iv)


def nominal_voltage_norm(
    m: MotorParams,
    frame: ControlFrame,
    residual: VoltageResidual,
    iq: float,
    mode: str = "inductive",
) -> float:
    """Residual-corrected transient voltage norm a candidate current needs.

    This is the quantity the transient set bounds by the budget; exposing
    it lets tests and audits verify emitted commands never demand more
    than v_limit.
    """
    a_d = -m.p * frame.qd_prev * m.l_q
    u_d = a_d * iq + residual.u_d
    if mode == "inductive":
        slew = m.l_q / frame.dt
        u_q = m.r_s * iq + slew * (iq - frame.iq_prev) + m.p * frame.qd_prev * m.phi + residual.u_q
    elif mode == "emf_scaled":
        slew = m.p * frame.qd_prev * m.phi / frame.dt
        u_q = m.r_s * iq + slew * (iq - frame.iq_prev) + residual.u_q
    else:
        raise ValueError(f"unknown transient mode {mode!r}")
    return math.hypot(u_d, u_q)
