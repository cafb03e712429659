"""Scenario configuration, experiment drivers, metrics, and reports.

A scenario is one human-editable YAML file with nested sections; unknown
keys are rejected so misspelled settings fail loudly instead of silently
running defaults. The suite driver runs scenario directories trial by
trial, writes per-trial trace CSVs plus aggregate metric tables, and is
deterministic given the configured seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .actuator import JointParams, MotorParams, friction, get_preset
from .envelope import EnvelopeConfig
from .feasibility import FeasibilityConfig, velocity_budget
from .pipelines import Controller, MorEnvelope, make_controller
from .plant import MismatchConfig, Trace, run_episode

SUPPORTED_DT_P = (0.001, 0.005, 0.01, 0.05)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NOTHING_TO_RUN = 3


class ConfigError(ValueError):
    """Scenario file failed validation; message names the offending field."""


@dataclass(frozen=True)
class CommandProfile:
    """Desired-motion source: a torque step, optionally from a moving start."""

    kind: str = "torque_step"   # torque_step | brake_to_boundary
    torque_nm: float = 0.0
    t_on: float = 0.0
    t_off: float = math.inf
    q0: float = 0.0
    qd0: float = 0.0

    def torque_at(self, t: float) -> float:
        return self.torque_nm if self.t_on <= t < self.t_off else 0.0


@dataclass(frozen=True)
class Scenario:
    """Fully-resolved, validated description of one experiment."""

    name: str
    controller: str
    duration_s: float
    motor: MotorParams
    joint: JointParams
    profile: CommandProfile
    preset: str = "8115-like"
    mismatch: MismatchConfig = field(default_factory=MismatchConfig)
    dt: float = 0.001
    dt_sim: float = 2.0e-5
    dt_p: float = 0.001
    s: int = 2
    seed: int | tuple[int, ...] = 0
    trials: int = 1
    accel_bound_ab: float = 6000.0
    accel_bound_cb: float = 800.0
    horizon_corrected: bool = False
    transient_mode: str = "inductive"
    i_max: float = 60.0
    residual_alpha: float = 1.0
    mor: MorEnvelope | None = None

    def trial_seeds(self) -> list[int]:
        if isinstance(self.seed, tuple):
            if len(self.seed) != self.trials:
                raise ConfigError(
                    f"seed: expected {self.trials} per-trial seeds, got {len(self.seed)}"
                )
            return list(self.seed)
        return [int(self.seed)] * self.trials

    def build_controller(self, controller_id: str | None = None) -> Controller:
        cid = controller_id or self.controller
        if cid in ("vbac-ab", "vbac-mor"):
            bound = self.accel_bound_ab
        else:
            bound = self.accel_bound_cb
        env = EnvelopeConfig(
            dt_p=self.dt_p,
            qdd_const_lb=-bound,
            qdd_const_ub=bound,
            horizon_corrected=self.horizon_corrected,
        )
        feas = FeasibilityConfig(
            i_max=self.i_max,
            transient_mode=self.transient_mode,
            residual_alpha=self.residual_alpha,
        )
        return make_controller(cid, self.motor, self.joint, env, feas=feas, mor=self.mor)


_TOP_KEYS = {
    "name", "controller", "duration_s", "dt", "dt_sim", "dt_p", "s", "seed",
    "trials", "motor", "joint", "envelope", "feasibility", "profile",
    "mismatch", "mor",
}
_MOTOR_KEYS = {
    "preset", "l_q", "r_s", "phi", "p", "k_t", "v_bus", "v_limit",
    "v_limit_from_velocity_bound", "i_max",
}
_JOINT_KEYS = {"inertia", "viscous", "coulomb", "q_lb", "q_ub", "qd_ub"}
_ENV_KEYS = {"dt_p", "accel_bound_ab", "accel_bound_cb", "horizon_corrected"}
_FEAS_KEYS = {"transient_mode", "i_max", "residual_alpha"}
_PROFILE_KEYS = {"type", "torque_nm", "t_on", "t_off", "q0", "qd0"}
_MIS_KEYS = {"r_s_scale", "phi_scale", "l_q_scale", "u_offset", "encoder_noise_std"}
_MOR_KEYS = {"v_ref", "tau_max", "omega_c", "omega_max"}

_CONTROLLERS = ("vra", "vbac-ab", "vbac-cb", "vbac-mor", "raw")
_PROFILE_KINDS = ("torque_step", "brake_to_boundary")


def _reject_unknown(section: dict, known: set[str], where: str) -> None:
    unknown = set(section) - known
    if unknown:
        names = ", ".join(sorted(unknown))
        raise ConfigError(f"{where}: unknown key(s): {names}")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def scenario_from_dict(raw: dict) -> Scenario:
    """Validate a nested scenario mapping and resolve it against presets."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario: top level must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "scenario")
    _require("name" in raw, "name: required")
    _require("controller" in raw, "controller: required")
    _require("duration_s" in raw, "duration_s: required")
    controller = str(raw["controller"])
    _require(
        controller in _CONTROLLERS,
        f"controller: must be one of {_CONTROLLERS}, got {controller!r}",
    )
    duration = float(raw["duration_s"])
    _require(duration > 0.0, "duration_s: must be positive")
    dt = float(raw.get("dt", 0.001))
    _require(dt > 0.0, "dt: must be positive")
    dt_sim = float(raw.get("dt_sim", 2.0e-5))
    _require(dt_sim > 0.0, "dt_sim: must be positive")
    s = int(raw.get("s", 2))
    _require(s >= 1, "s: must be >= 1")
    trials = int(raw.get("trials", 1))
    _require(trials >= 1, "trials: must be >= 1")
    seed_raw = raw.get("seed", 0)
    seed: int | tuple[int, ...]
    if isinstance(seed_raw, (list, tuple)):
        seed = tuple(int(v) for v in seed_raw)
    else:
        seed = int(seed_raw)

    msec = dict(raw.get("motor") or {})
    _reject_unknown(msec, _MOTOR_KEYS, "motor")
    _require("preset" in msec, "motor.preset: required")
    preset = get_preset(str(msec["preset"]))
    motor = preset.motor
    overrides = {
        k: float(msec[k]) for k in ("l_q", "r_s", "phi", "p", "k_t", "v_bus", "v_limit")
        if k in msec
    }
    if overrides:
        motor = replace(motor, **overrides)
    i_max = float(msec.get("i_max", preset.i_max))

    jsec = dict(raw.get("joint") or {})
    _reject_unknown(jsec, _JOINT_KEYS, "joint")
    joint = preset.joint
    joverrides = {k: float(jsec[k]) for k in _JOINT_KEYS if k in jsec}
    if joverrides:
        joint = replace(joint, **joverrides)

    if msec.get("v_limit_from_velocity_bound", False) and "v_limit" not in msec:
        motor = motor.with_budget(velocity_budget(motor, joint.qd_ub))
    _require(
        motor.v_limit <= motor.v_bus,
        "motor.v_limit: must not exceed motor.v_bus",
    )

    esec = dict(raw.get("envelope") or {})
    _reject_unknown(esec, _ENV_KEYS, "envelope")
    dt_p = float(esec.get("dt_p", raw.get("dt_p", 0.001)))
    _require(
        any(abs(dt_p - v) < 1e-12 for v in SUPPORTED_DT_P),
        f"envelope.dt_p: must be one of {SUPPORTED_DT_P}, got {dt_p}",
    )
    ab = float(esec.get("accel_bound_ab", 6000.0))
    cb = float(esec.get("accel_bound_cb", 800.0))
    _require(ab > 0.0, "envelope.accel_bound_ab: must be positive")
    _require(cb > 0.0, "envelope.accel_bound_cb: must be positive")
    horizon_corrected = bool(esec.get("horizon_corrected", False))

    fsec = dict(raw.get("feasibility") or {})
    _reject_unknown(fsec, _FEAS_KEYS, "feasibility")
    transient_mode = str(fsec.get("transient_mode", "inductive"))
    i_max = float(fsec.get("i_max", i_max))
    residual_alpha = float(fsec.get("residual_alpha", 1.0))

    psec = dict(raw.get("profile") or {})
    _reject_unknown(psec, _PROFILE_KEYS, "profile")
    kind = str(psec.get("type", "torque_step"))
    _require(
        kind in _PROFILE_KINDS,
        f"profile.type: must be one of {_PROFILE_KINDS}, got {kind!r}",
    )
    profile = CommandProfile(
        kind=kind,
        torque_nm=float(psec.get("torque_nm", 0.0)),
        t_on=float(psec.get("t_on", 0.0)),
        t_off=float(psec.get("t_off", math.inf)),
        q0=float(psec.get("q0", 0.0)),
        qd0=float(psec.get("qd0", 0.0)),
    )
    _require(profile.t_on >= 0.0, "profile.t_on: must be >= 0")
    _require(profile.t_off > profile.t_on, "profile.t_off: must exceed t_on")

    misec = dict(raw.get("mismatch") or {})
    _reject_unknown(misec, _MIS_KEYS, "mismatch")
    try:
        mismatch = MismatchConfig(
            r_s_scale=float(misec.get("r_s_scale", 1.0)),
            phi_scale=float(misec.get("phi_scale", 1.0)),
            l_q_scale=float(misec.get("l_q_scale", 1.0)),
            u_offset=float(misec.get("u_offset", 0.0)),
            encoder_noise_std=float(misec.get("encoder_noise_std", 0.0)),
        )
    except ValueError as e:
        raise ConfigError(f"mismatch: {e}") from None

    mor = None
    if raw.get("mor") is not None:
        osec = dict(raw["mor"])
        _reject_unknown(osec, _MOR_KEYS, "mor")
        base = MorEnvelope.from_motor(motor, i_max, v_ref=float(osec.get("v_ref", 48.0)))
        mor = MorEnvelope(
            tau_max=float(osec.get("tau_max", base.tau_max)),
            omega_c=float(osec.get("omega_c", base.omega_c)),
            omega_max=float(osec.get("omega_max", base.omega_max)),
            v_ref=base.v_ref,
        )

    try:
        return Scenario(
            name=str(raw["name"]),
            controller=controller,
            duration_s=duration,
            motor=motor,
            joint=joint,
            profile=profile,
            preset=str(msec["preset"]),
            mismatch=mismatch,
            dt=dt,
            dt_sim=dt_sim,
            dt_p=dt_p,
            s=s,
            seed=seed,
            trials=trials,
            accel_bound_ab=ab,
            accel_bound_cb=cb,
            horizon_corrected=horizon_corrected,
            transient_mode=transient_mode,
            i_max=i_max,
            residual_alpha=residual_alpha,
            mor=mor,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None


def scenario_to_dict(sc: Scenario) -> dict:
    """Canonical full mapping; loads back to an equal Scenario."""
    d: dict = {
        "name": sc.name,
        "controller": sc.controller,
        "duration_s": sc.duration_s,
        "dt": sc.dt,
        "dt_sim": sc.dt_sim,
        "s": sc.s,
        "seed": list(sc.seed) if isinstance(sc.seed, tuple) else sc.seed,
        "trials": sc.trials,
        "motor": {
            "preset": sc.preset,
            "l_q": sc.motor.l_q, "r_s": sc.motor.r_s, "phi": sc.motor.phi,
            "p": sc.motor.p, "k_t": sc.motor.k_t,
            "v_bus": sc.motor.v_bus, "v_limit": sc.motor.v_limit,
            "i_max": sc.i_max,
        },
        "joint": {
            "inertia": sc.joint.inertia, "viscous": sc.joint.viscous,
            "coulomb": sc.joint.coulomb, "q_lb": sc.joint.q_lb,
            "q_ub": sc.joint.q_ub, "qd_ub": sc.joint.qd_ub,
        },
        "envelope": {
            "dt_p": sc.dt_p,
            "accel_bound_ab": sc.accel_bound_ab,
            "accel_bound_cb": sc.accel_bound_cb,
            "horizon_corrected": sc.horizon_corrected,
        },
        "feasibility": {
            "transient_mode": sc.transient_mode,
            "i_max": sc.i_max,
            "residual_alpha": sc.residual_alpha,
        },
        "profile": {
            "type": sc.profile.kind,
            "torque_nm": sc.profile.torque_nm,
            "t_on": sc.profile.t_on,
            "t_off": sc.profile.t_off,
            "q0": sc.profile.q0,
            "qd0": sc.profile.qd0,
        },
        "mismatch": {
            "r_s_scale": sc.mismatch.r_s_scale,
            "phi_scale": sc.mismatch.phi_scale,
            "l_q_scale": sc.mismatch.l_q_scale,
            "u_offset": sc.mismatch.u_offset,
            "encoder_noise_std": sc.mismatch.encoder_noise_std,
        },
    }
    if sc.mor is not None:
        d["mor"] = {
            "v_ref": sc.mor.v_ref, "tau_max": sc.mor.tau_max,
            "omega_c": sc.mor.omega_c, "omega_max": sc.mor.omega_max,
        }
    if math.isinf(d["profile"]["t_off"]):
        del d["profile"]["t_off"]
    return d


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate one scenario file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: not valid YAML: {e}") from None
    try:
        return scenario_from_dict(raw)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


def run_scenario(
    sc: Scenario,
    controller_override: str | None = None,
    seed_override: int | None = None,
    dt_p_override: float | None = None,
) -> list[Trace]:
    """Run all trials of a scenario; one Trace per trial."""
    if dt_p_override is not None:
        sc = replace(sc, dt_p=dt_p_override)
    if seed_override is not None:
        sc = replace(sc, seed=int(seed_override))
    traces = []
    for trial_seed in sc.trial_seeds():
        trial_sc = replace(sc, seed=trial_seed)
        controller = sc.build_controller(controller_override)
        traces.append(
            run_episode(trial_sc, controller, sc.motor, sc.joint, sc.mismatch)
        )
    return traces


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class MetricsReport:
    realizable_fraction: float  # share of unsaturated control steps, [0, 1]
    dqd_max: float              # worst velocity-bound violation [rad/s]
    dqd_rms: float              # one-step velocity realization error [rad/s]
    dtau_rms: float             # commanded-vs-realized torque error [Nm]
    f_zc: float                 # torque-error zero-crossing frequency [Hz]
    success: bool               # commands stayed inside the realizable set

    def __post_init__(self):
        if not 0.0 <= self.realizable_fraction <= 1.0:
            raise ValueError("realizable_fraction must be in [0, 1]")
        for name in ("dqd_rms", "dtau_rms", "f_zc"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")


def realizable_fraction(trace: Trace, start: int = 0, stop: int | None = None) -> float:
    """1 - (saturated steps / total steps) over [start, stop)."""
    sat = trace["saturated"][start:stop]
    if len(sat) == 0:
        raise ValueError("realizable_fraction: empty step window")
    return 1.0 - float(np.count_nonzero(sat)) / len(sat)


def zero_crossing_frequency(signal: np.ndarray, dt: float) -> float:
    """Sign changes between consecutive samples divided by signal duration."""
    if len(signal) < 2:
        raise ValueError("zero_crossing_frequency needs at least 2 samples")
    s = np.sign(signal)
    crossings = int(np.count_nonzero(s[:-1] * s[1:] < 0))
    return crossings / (len(signal) * dt)


def boundary_window(trace: Trace) -> tuple[int, int] | None:
    """Window from first near-boundary entry to the first velocity zero crossing.

    Entry is when the distance to the nearest position bound first drops
    below 10 % of the position range. Returns None if the trace never gets
    that close.
    """
    j = trace.joint
    if j is None:
        raise ValueError("trace has no joint parameters attached")
    q = trace["q"]
    qd = trace["qd"]
    rng = j.q_ub - j.q_lb
    near = np.minimum(j.q_ub - q, q - j.q_lb) < 0.1 * rng
    starts = np.flatnonzero(near)
    if len(starts) == 0:
        return None
    i0 = int(starts[0])
    # Reference direction: first nonzero velocity from the window start.
    v0 = 0.0
    for k in range(i0, len(trace)):
        if qd[k] != 0.0:
            v0 = qd[k]
            break
    if v0 == 0.0:
        return i0, len(trace)
    for k in range(i0 + 1, len(trace)):
        if qd[k] * v0 <= 0.0:
            return i0, k + 1
    return i0, len(trace)


# Tolerance for the success check: the realizable acceleration set is
# reconstructed from the logged current set with the logged (true)
# velocity, which can differ from the velocity the pipeline measured by up
# to half an acceleration-step; 1 rad/s^2 absorbs that without masking
# genuine violations, which are orders of magnitude larger.
_SUCCESS_ATOL = 1.0


def near_boundary_metrics(trace: Trace, window: tuple[int, int]) -> MetricsReport:
    """Tracking, smoothness and realizability metrics over a step window."""
    i0, i1 = window
    if i1 - i0 < 2:
        raise ValueError("metrics window must span at least 2 samples")
    if trace.motor is None or trace.joint is None:
        raise ValueError("trace has no parameter metadata attached")
    m, j = trace.motor, trace.joint
    dt = trace.dt

    qd = trace["qd"][i0:i1]
    qdd_cmd = trace["qdd_cmd"][i0:i1]
    iq = trace["iq"]
    h = np.array([friction(j, v) for v in qd])

    dqd_max = max(0.0, float(np.max(np.abs(qd))) - j.qd_ub)

    # One-step realization errors: each command k is judged against the
    # sample at k+1, which is what it produced.
    upto = min(i1, len(trace) - 1)
    n_err = upto - i0
    qd_next = trace["qd"][i0 + 1 : upto + 1]
    iq_next = iq[i0 + 1 : upto + 1]
    v_implied = qd[:n_err] + qdd_cmd[:n_err] * dt
    dqd_err = v_implied - qd_next
    tau_cmd = j.inertia * qdd_cmd[:n_err] + h[:n_err]
    tau_real = m.k_t * iq_next
    tau_err = tau_cmd - tau_real
    if n_err < 1:
        raise ValueError("metrics window has no realized successor samples")
    dqd_rms = float(np.sqrt(np.mean(dqd_err**2)))
    dtau_rms = float(np.sqrt(np.mean(tau_err**2)))
    f_zc = zero_crossing_frequency(tau_err, dt) if n_err >= 2 else 0.0

    iset_lo = trace["iset_lo"][i0:i1]
    iset_hi = trace["iset_hi"][i0:i1]
    av_lo = (m.k_t * iset_lo - h) / j.inertia
    av_hi = (m.k_t * iset_hi - h) / j.inertia
    finite = np.isfinite(av_lo) & np.isfinite(av_hi)
    inside = (
        (qdd_cmd >= av_lo - _SUCCESS_ATOL)
        & (qdd_cmd <= av_hi + _SUCCESS_ATOL)
        & finite
    )
    success = bool(np.all(inside))

    return MetricsReport(
        realizable_fraction=realizable_fraction(trace, i0, i1),
        dqd_max=dqd_max,
        dqd_rms=dqd_rms,
        dtau_rms=dtau_rms,
        f_zc=f_zc,
        success=success,
    )


def metrics_for_trace(trace: Trace) -> MetricsReport | None:
    """Boundary-window metrics, or None if no boundary approach occurred."""
    window = boundary_window(trace)
    if window is None:
        return None
    return near_boundary_metrics(trace, window)


# ---------------------------------------------------------------------------
# Suite driver


@dataclass
class SuiteRow:
    scenario: str
    controller: str
    dt_p: float
    trial: int
    seed: int
    trace_path: str
    metrics: MetricsReport | None
    full_fraction: float


@dataclass
class SuiteReport:
    status: str
    rows: list[SuiteRow] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)
    identical_trials: dict[str, bool] = field(default_factory=dict)

    def aggregate(self) -> list[dict]:
        """Mean-over-trials metrics keyed (scenario, controller, dt_p)."""
        groups: dict[tuple[str, str, float], list[SuiteRow]] = {}
        for row in self.rows:
            groups.setdefault((row.scenario, row.controller, row.dt_p), []).append(row)
        out = []
        for (scen, ctrl, dt_p), rows in sorted(groups.items()):
            withm = [r for r in rows if r.metrics is not None]
            agg = {
                "scenario": scen,
                "controller": ctrl,
                "dt_p": dt_p,
                "trials": len(rows),
                "realizable_fraction": float(
                    np.mean([r.full_fraction for r in rows])
                ),
            }
            if withm:
                agg.update(
                    dqd_max=float(np.mean([r.metrics.dqd_max for r in withm])),
                    dqd_rms=float(np.mean([r.metrics.dqd_rms for r in withm])),
                    dtau_rms=float(np.mean([r.metrics.dtau_rms for r in withm])),
                    f_zc=float(np.mean([r.metrics.f_zc for r in withm])),
                    success=all(r.metrics.success for r in withm),
                )
            else:
                agg.update(
                    dqd_max=math.nan, dqd_rms=math.nan, dtau_rms=math.nan,
                    f_zc=math.nan, success=None,
                )
            out.append(agg)
        return out


_METRIC_FIELDS = (
    "realizable_fraction", "dqd_max", "dqd_rms", "dtau_rms", "f_zc", "success",
)


def _write_metrics_csv(report: SuiteReport, path: Path) -> None:
    with open(path, "w") as f:
        f.write(
            "scenario,controller,dt_p,trial,seed,full_realizable_fraction,"
            + ",".join(_METRIC_FIELDS) + ",trace\n"
        )
        for r in report.rows:
            vals = [r.scenario, r.controller, f"{r.dt_p:g}", str(r.trial),
                    str(r.seed), f"{r.full_fraction:.6f}"]
            if r.metrics is None:
                vals += ["nan"] * (len(_METRIC_FIELDS) - 1) + [""]
            else:
                m = r.metrics
                vals += [
                    f"{m.realizable_fraction:.6f}", f"{m.dqd_max:.6g}",
                    f"{m.dqd_rms:.6g}", f"{m.dtau_rms:.6g}", f"{m.f_zc:.6g}",
                    "1" if m.success else "0",
                ]
            vals.append(r.trace_path)
            f.write(",".join(vals) + "\n")


def _write_table_csv(report: SuiteReport, path: Path) -> None:
    cols = ("scenario", "controller", "dt_p", "trials", "success", "dqd_max",
            "dqd_rms", "dtau_rms", "f_zc", "realizable_fraction")
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for agg in report.aggregate():
            row = []
            for c in cols:
                v = agg[c]
                if isinstance(v, bool):
                    row.append("yes" if v else "no")
                elif v is None:
                    row.append("")
                elif isinstance(v, float):
                    row.append(f"{v:.6g}")
                else:
                    row.append(str(v))
            f.write(",".join(row) + "\n")


def run_experiment_suite(
    config_dir: str | Path,
    out_dir: str | Path,
    emit_gnuplot: bool = False,
    full_diagnostics: bool = False,
) -> SuiteReport:
    """Run every scenario file in a directory and write report files.

    Per-scenario failures are recorded and the suite continues. Returns a
    report whose status is "ok" or "nothing to run".
    """
    config_dir = Path(config_dir)
    out_dir = Path(out_dir)
    paths = sorted(
        p for p in config_dir.iterdir()
        if p.suffix in (".yaml", ".yml") and p.is_file()
    ) if config_dir.is_dir() else []
    report = SuiteReport(status="ok" if paths else "nothing to run")
    out_dir.mkdir(parents=True, exist_ok=True)
    traces_dir = out_dir / "traces"
    traces_dir.mkdir(exist_ok=True)

    for path in paths:
        try:
            sc = load_scenario(path)
            traces = run_scenario(sc)
            seeds = sc.trial_seeds()
            for trial, (trace, seed) in enumerate(zip(traces, seeds)):
                tp = traces_dir / f"{sc.name}_trial{trial}.csv"
                trace.to_csv(tp)
                if full_diagnostics:
                    trace.write_diagnostics_csv(
                        traces_dir / f"{sc.name}_trial{trial}_diag.csv"
                    )
                report.rows.append(SuiteRow(
                    scenario=sc.name,
                    controller=sc.controller,
                    dt_p=sc.dt_p,
                    trial=trial,
                    seed=seed,
                    trace_path=str(tp),
                    metrics=metrics_for_trace(trace),
                    full_fraction=realizable_fraction(trace),
                ))
            if len(traces) > 1:
                first = traces[0]
                report.identical_trials[sc.name] = all(
                    all(np.array_equal(t[c], first[c]) for c in first.columns)
                    for t in traces[1:]
                )
        except Exception as e:  # noqa: BLE001 - suite must keep going
            report.errors[path.name] = f"{type(e).__name__}: {e}"

    _write_metrics_csv(report, out_dir / "metrics.csv")
    _write_table_csv(report, out_dir / "table.csv")
    if emit_gnuplot:
        write_gnuplot_script(report, out_dir)
    return report


def write_gnuplot_script(report: SuiteReport, out_dir: Path) -> Path:
    """Emit a gnuplot script rendering the suite's standard plots."""
    out_dir = Path(out_dir)
    lines = [
        "set datafile separator comma",
        "set key outside",
        "set term pngcairo size 1200,800",
        "",
        "set output 'realizable_fraction.png'",
        "set style data histogram",
        "set style fill solid 0.7",
        "set yrange [0:1.05]",
        "set ylabel 'realizable fraction'",
        "plot 'table.csv' using 10:xtic(2) title 'per controller'",
    ]
    for r in report.rows[:8]:
        stem = Path(r.trace_path).name
        lines += [
            "",
            f"set output 'velocity_{r.scenario}_t{r.trial}.png'",
            "set ylabel 'qd [rad/s]'",
            f"plot 'traces/{stem}' using 1:3 with lines title '{r.scenario} qd'",
            "",
            f"set output 'torque_{r.scenario}_t{r.trial}.png'",
            "set ylabel 'torque [Nm]'",
            f"plot 'traces/{stem}' using 1:($16*{_kt_of(r, report)}) with lines "
            f"title 'commanded', 'traces/{stem}' using 1:($4*{_kt_of(r, report)}) "
            "with lines title 'realized'",
        ]
    path = out_dir / "plots.gp"
    path.write_text("\n".join(lines) + "\n")
    return path


def _kt_of(row: SuiteRow, report: SuiteReport) -> float:
    trace = Trace.from_csv(row.trace_path)
    return trace.motor.k_t if trace.motor else 1.0


def sweep_scenario(
    sc: Scenario, param: str, values: list[float]
) -> list[tuple[float, Trace]]:
    """Re-run a scenario overriding one dotted config path per value."""
    results = []
    base = scenario_to_dict(sc)
    for v in values:
        d = _copy_nested(base)
        _set_dotted(d, param, v)
        sc_v = scenario_from_dict(d)
        results.append((v, run_scenario(sc_v)[0]))
    return results


def _copy_nested(d: dict) -> dict:
    return {k: (_copy_nested(v) if isinstance(v, dict) else v) for k, v in d.items()}


def _set_dotted(d: dict, path: str, value) -> None:
    keys = path.split(".")
    cur = d
    for k in keys[:-1]:
        if k not in cur or not isinstance(cur[k], dict):
            cur[k] = {}
        cur = cur[k]
    cur[keys[-1]] = value
