"""Continuous-time single-joint PMSM plant with a voltage-limited drive.

The plant integrates the q-axis electrical dynamics and the joint
mechanics with RK4 at a sub-millisecond step, while a PI current loop with
back-EMF feedforward runs at the same rate and its requested voltage is
clamped to the DC-link circle. Parameter mismatch, a supply bias and
encoder noise are injectable, which makes the plant the execution-side
oracle for everything the feasibility layer predicts.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .actuator import JointParams, JointState, MotorParams, friction
from .feasibility import ControlFrame
from .pipelines import Controller, StepDiagnostics

TRACE_COLUMNS = (
    "time", "q", "qd", "iq", "ud_req", "uq_req", "ud", "uq", "saturated",
    "acmd_lo", "acmd_hi", "iset_lo", "iset_hi", "qdd_des", "qdd_cmd",
    "iq_cmd", "flags",
)


class NonFiniteStateError(RuntimeError):
    """Raised when integration produces a non-finite plant state."""


@dataclass
class PlantState:
    q: float            # [rad]
    qd: float           # [rad/s]
    iq: float           # [A]
    ud: float = 0.0     # last applied d-axis voltage [V]
    uq: float = 0.0     # last applied q-axis voltage [V]
    saturated: bool = False
    time: float = 0.0   # [s]


@dataclass(frozen=True)
class MismatchConfig:
    """Injectable plant-vs-model discrepancies."""

    r_s_scale: float = 1.0
    phi_scale: float = 1.0
    l_q_scale: float = 1.0
    u_offset: float = 0.0           # additive q-axis supply bias [V]
    encoder_noise_std: float = 0.0  # applied to reported position [rad]

    def __post_init__(self):
        for name in ("r_s_scale", "phi_scale", "l_q_scale"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"MismatchConfig.{name} must be strictly positive")
        if self.encoder_noise_std < 0.0:
            raise ValueError("MismatchConfig.encoder_noise_std must be >= 0")

    @staticmethod
    def neutral() -> "MismatchConfig":
        return MismatchConfig()


@dataclass
class PiGains:
    kp: float  # [V/A]
    ki: float  # [V/(A s)]

    @staticmethod
    def for_one_step_slew(m: MotorParams, dt_ctrl: float) -> "PiGains":
        """Tune the current loop to slew over roughly one control period.

        This keeps the drive's transient voltage demand aligned with the
        one-step slew cost the feasibility layer budgets for, instead of a
        much faster loop that would request more voltage than predicted.
        """
        return PiGains(kp=m.l_q / dt_ctrl, ki=m.r_s / dt_ctrl)


class QCurrentPi:
    """PI current regulator with back-EMF feedforward, integrator clamped."""

    def __init__(self, gains: PiGains, v_clamp: float):
        self.gains = gains
        self.v_clamp = v_clamp
        self.integ = 0.0

    def reset(self) -> None:
        self.integ = 0.0

    def compute(
        self, i_ref: float, iq: float, qd: float, m: MotorParams, dt: float
    ) -> tuple[float, float]:
        err = i_ref - iq
        self.integ += self.gains.ki * err * dt
        if self.integ > self.v_clamp:
            self.integ = self.v_clamp
        elif self.integ < -self.v_clamp:
            self.integ = -self.v_clamp
        u_q = self.gains.kp * err + self.integ + m.p * qd * m.phi
        u_d = -m.p * qd * m.l_q * iq
        return u_d, u_q


def current_controller(
    i_ref: float, s: PlantState, m: MotorParams, pi: QCurrentPi, dt: float
) -> tuple[float, float]:
    """Requested dq voltages for one inner-loop update."""
    return pi.compute(i_ref, s.iq, s.qd, m, dt)


def saturate_voltage(
    ud_req: float, uq_req: float, v_bus: float
) -> tuple[float, float, bool]:
    """Clamp a voltage request to the DC-link circle.

    The d-axis is preserved when possible (it is what keeps i_d regulated
    at zero) and only the q-axis is shortened; a d-axis request already
    beyond the circle forces a radial rescale of the whole vector.
    """
    norm = math.hypot(ud_req, uq_req)
    if norm <= v_bus:
        return ud_req, uq_req, False
    if abs(ud_req) > v_bus:
        k = v_bus / norm
        return ud_req * k, uq_req * k, True
    head = math.sqrt(v_bus * v_bus - ud_req * ud_req)
    return ud_req, math.copysign(head, uq_req), True


class PlantSim:
    """RK4-integrated plant; electrical state is the q-axis current only."""

    def __init__(
        self,
        m: MotorParams,
        j: JointParams,
        mis: MismatchConfig,
        x0: JointState,
        dt_sim: float = 2.0e-5,
        gains: PiGains | None = None,
        dt_ctrl: float = 1.0e-3,
    ):
        if not dt_sim > 0.0:
            raise ValueError("dt_sim must be strictly positive")
        self.m = m
        self.j = j
        self.mis = mis
        self.dt_sim = dt_sim
        self.state = PlantState(q=x0.q, qd=x0.qd, iq=x0.iq)
        self.pi = QCurrentPi(gains or PiGains.for_one_step_slew(m, dt_ctrl), m.v_bus)
        # mismatch-scaled (true) electrical parameters
        self._r_true = m.r_s * mis.r_s_scale
        self._phi_true = m.phi * mis.phi_scale
        self._l_true = m.l_q * mis.l_q_scale

    def _deriv(self, iq: float, qd: float, u_q: float) -> tuple[float, float, float]:
        di = (u_q + self.mis.u_offset - self._r_true * iq
              - self.m.p * qd * self._phi_true) / self._l_true
        dqd = (self.m.k_t * iq - friction(self.j, qd)) / self.j.inertia
        return di, dqd, qd

    def step(self, u_d: float, u_q: float, dt: float | None = None) -> PlantState:
        """Advance one RK4 step holding the applied voltage constant."""
        h = self.dt_sim if dt is None else dt
        s = self.state
        i0, v0, q0 = s.iq, s.qd, s.q
        k1i, k1v, k1q = self._deriv(i0, v0, u_q)
        k2i, k2v, k2q = self._deriv(i0 + 0.5 * h * k1i, v0 + 0.5 * h * k1v, u_q)
        k3i, k3v, k3q = self._deriv(i0 + 0.5 * h * k2i, v0 + 0.5 * h * k2v, u_q)
        k4i, k4v, k4q = self._deriv(i0 + h * k3i, v0 + h * k3v, u_q)
        s.iq = i0 + (h / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
        s.qd = v0 + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        s.q = q0 + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        s.ud, s.uq = u_d, u_q
        s.time += h
        if not (math.isfinite(s.iq) and math.isfinite(s.qd) and math.isfinite(s.q)):
            raise NonFiniteStateError(
                f"non-finite plant state at t={s.time:.6f}: "
                f"iq={s.iq}, qd={s.qd}, q={s.q}"
            )
        return s

    def run_control_period(
        self, i_ref: float, n_sub: int
    ) -> tuple[float, float, float, float, bool]:
        """Hold one current command for n_sub inner-loop sub-steps.

        Returns (ud_avg, uq_avg, ud_req, uq_req, saturated) where the
        averages are of the post-saturation applied voltage over the
        period, the request is the sub-step request of largest norm, and
        saturated is true if any sub-step exceeded the DC-link circle.
        """
        ud_sum = uq_sum = 0.0
        req_d = req_q = 0.0
        req_norm = -1.0
        sat_any = False
        for _ in range(n_sub):
            ud_r, uq_r = self.pi.compute(
                i_ref, self.state.iq, self.state.qd, self.m, self.dt_sim
            )
            ud, uq, sat = saturate_voltage(ud_r, uq_r, self.m.v_bus)
            sat_any = sat_any or sat
            n = math.hypot(ud_r, uq_r)
            if n > req_norm:
                req_norm = n
                req_d, req_q = ud_r, uq_r
            self.step(ud, uq)
            ud_sum += ud
            uq_sum += uq
        self.state.saturated = sat_any
        return ud_sum / n_sub, uq_sum / n_sub, req_d, req_q, sat_any


@dataclass
class Trace:
    """Per-control-step record of one episode.

    The serialized CSV carries exactly TRACE_COLUMNS in that order; the
    in-memory object additionally keeps the full per-step pipeline
    diagnostics and the parameter set the episode ran with.
    """

    columns: dict[str, np.ndarray]
    diags: list[StepDiagnostics | None] = field(default_factory=list)
    controller_id: str = ""
    scenario_name: str = ""
    dt: float = 0.0
    motor: MotorParams | None = None
    joint: JointParams | None = None

    def __len__(self) -> int:
        return len(self.columns["time"])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(TRACE_COLUMNS)
            cols = [self.columns[c] for c in TRACE_COLUMNS]
            for row in zip(*cols):
                w.writerow(
                    [
                        int(v) if c in ("saturated", "flags") else f"{v:.17g}"
                        for c, v in zip(TRACE_COLUMNS, row)
                    ]
                )
        self._write_meta(path)

    def _write_meta(self, csv_path: Path) -> None:
        meta = {
            "controller": self.controller_id,
            "scenario": self.scenario_name,
            "dt": self.dt,
            "motor": asdict(self.motor) if self.motor else None,
            "joint": asdict(self.joint) if self.joint else None,
        }
        csv_path.with_suffix(csv_path.suffix + ".meta.json").write_text(
            json.dumps(meta, indent=2)
        )

    def write_diagnostics_csv(self, path: str | Path) -> None:
        """Sidecar with the quadratic coefficients and all interval sets."""
        header = [
            "time",
            "tr_a", "tr_b", "tr_c", "st_a", "st_b", "st_c",
            "str_lo", "str_hi", "sst_lo", "sst_hi",
            "iset_lo", "iset_hi", "av_lo", "av_hi", "reason",
        ]
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(header)
            for t, d in zip(self.columns["time"], self.diags):
                if d is None or d.feas is None:
                    continue
                fe = d.feas
                w.writerow([
                    f"{t:.17g}",
                    *(f"{v:.17g}" for v in (
                        fe.tr_coeffs.a, fe.tr_coeffs.b, fe.tr_coeffs.c,
                        fe.st_coeffs.a, fe.st_coeffs.b, fe.st_coeffs.c,
                        fe.s_tr.lo, fe.s_tr.hi, fe.s_st.lo, fe.s_st.hi,
                        fe.iset.lo, fe.iset.hi, d.a_v.lo, d.a_v.hi,
                    )),
                    d.reason,
                ])

    @staticmethod
    def from_csv(path: str | Path) -> "Trace":
        path = Path(path)
        with open(path, newline="") as f:
            r = csv.reader(f)
            header = next(r)
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace columns in {path}: {header}")
            rows = [[float(v) for v in row] for row in r]
        data = np.asarray(rows, dtype=float)
        if data.size == 0:
            data = data.reshape(0, len(TRACE_COLUMNS))
        columns = {c: data[:, i].copy() for i, c in enumerate(TRACE_COLUMNS)}
        trace = Trace(columns=columns, diags=[None] * len(data))
        meta_path = path.with_suffix(path.suffix + ".meta.json")
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
            trace.controller_id = meta.get("controller", "")
            trace.scenario_name = meta.get("scenario", "")
            trace.dt = meta.get("dt", 0.0)
            if meta.get("motor"):
                trace.motor = MotorParams(**meta["motor"])
            if meta.get("joint"):
                trace.joint = JointParams(**meta["joint"])
        return trace


def desired_accel_from_torque(
    m: MotorParams, j: JointParams, tau: float, qd: float
) -> float:
    """Acceleration a raw torque command would nominally produce at speed qd."""
    return (tau - friction(j, qd)) / j.inertia


def run_episode(scenario, controller: Controller, m: MotorParams,
                j: JointParams, mis: MismatchConfig) -> Trace:
    """Zero-order-hold closed loop of one scenario; deterministic per seed.

    ``scenario`` provides duration_s, dt, dt_sim, seed, s and a command
    profile (torque_nm, t_on, t_off, q0, qd0). The controller sees only
    encoder-derived measurements: position with injected noise and
    velocity by first difference; the drive's inner loop runs on the true
    state at the simulation rate.
    """
    dt = scenario.dt
    dt_sim = scenario.dt_sim
    if dt_sim > dt / 10.0 + 1e-15:
        raise ValueError("dt_sim must be at most dt/10")
    n_sub = round(dt / dt_sim)
    if abs(n_sub * dt_sim - dt) > 1e-12:
        raise ValueError("dt must be an integer multiple of dt_sim")
    n_steps = round(scenario.duration_s / dt)
    prof = scenario.profile
    rng = np.random.default_rng(scenario.seed)
    sigma = mis.encoder_noise_std

    x0 = JointState(q=prof.q0, qd=prof.qd0, iq=0.0)
    plant = PlantSim(m, j, mis, x0, dt_sim=dt_sim, dt_ctrl=dt)
    controller.reset()

    cols = {c: np.zeros(n_steps) for c in TRACE_COLUMNS}
    diags: list[StepDiagnostics | None] = []

    # Bootstrap: back-fill history with the initial state so the first
    # residual evaluates to zero.
    q_meas_prev = prof.q0
    v_meas_prev = prof.qd0
    ud_prev = -m.p * prof.qd0 * m.l_q * x0.iq
    uq_prev = m.r_s * x0.iq + m.p * prof.qd0 * m.phi

    for k in range(n_steps):
        t = k * dt
        st = plant.state
        q_true, qd_true, iq_meas = st.q, st.qd, st.iq
        q_meas = q_true + sigma * rng.standard_normal() if sigma > 0.0 else q_true
        v_meas = (q_meas - q_meas_prev) / dt if k > 0 else prof.qd0

        frame = ControlFrame(
            q_prev=q_meas, qd_prev=v_meas, qd_prev2=v_meas_prev,
            iq_prev=iq_meas, ud_prev=ud_prev, uq_prev=uq_prev,
            dt=dt, s=scenario.s,
        )
        tau_des = prof.torque_at(t)
        des = desired_accel_from_torque(m, j, tau_des, v_meas)
        cmd = controller.step(des, frame)
        ud_avg, uq_avg, ud_req, uq_req, sat = plant.run_control_period(
            cmd.iq_cmd, n_sub
        )

        d = cmd.diag
        cols["time"][k] = t
        cols["q"][k] = q_true
        cols["qd"][k] = qd_true
        cols["iq"][k] = iq_meas
        cols["ud_req"][k] = ud_req
        cols["uq_req"][k] = uq_req
        cols["ud"][k] = ud_avg
        cols["uq"][k] = uq_avg
        cols["saturated"][k] = float(sat)
        cols["acmd_lo"][k] = d.a_cmd.lo if not d.a_cmd.empty else math.nan
        cols["acmd_hi"][k] = d.a_cmd.hi if not d.a_cmd.empty else math.nan
        cols["iset_lo"][k] = (
            d.feas.iset.lo if d.feas and not d.feas.iset.empty else math.nan
        )
        cols["iset_hi"][k] = (
            d.feas.iset.hi if d.feas and not d.feas.iset.empty else math.nan
        )
        cols["qdd_des"][k] = des
        cols["qdd_cmd"][k] = cmd.qdd_cmd
        cols["iq_cmd"][k] = cmd.iq_cmd
        cols["flags"][k] = float(d.flags_word())
        diags.append(d)

        q_meas_prev, v_meas_prev = q_meas, v_meas
        ud_prev, uq_prev = ud_avg, uq_avg

    return Trace(
        columns=cols,
        diags=diags,
        controller_id=controller.controller_id,
        scenario_name=getattr(scenario, "name", ""),
        dt=dt,
        motor=m,
        joint=j,
    )
