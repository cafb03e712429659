"""Discrete-time kinematic acceleration envelopes.

Position limits induce an exact interval of constant accelerations that
keep the in-step parabola inside the box over the reasoning horizon dt_p.
A braking-aware viability band keeps enough stopping distance toward each
bound, and a velocity envelope (used by the constant-bound baseline only)
caps the one-step velocity change. All envelopes operate on measured
state, so callers decide which velocity/position estimates to feed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actuator import JointParams
from .intervals import Interval

KINEMATIC_MODES = ("vra", "vbac")


@dataclass(frozen=True)
class EnvelopeConfig:
    """Kinematic reasoning step and the baseline's constant bounds."""

    dt_p: float                    # kinematic reasoning step [s]
    qdd_const_lb: float = -math.inf  # constant acceleration bounds, used by
    qdd_const_ub: float = math.inf   # the vbac baseline only [rad/s^2]
    horizon_corrected: bool = False  # vbac only: keep the in-step travel terms
                                     # inside the stopping-distance radicand

    def __post_init__(self):
        if not self.dt_p > 0.0:
            raise ValueError("EnvelopeConfig.dt_p must be strictly positive")
        if not self.qdd_const_lb < 0.0 < self.qdd_const_ub:
            raise ValueError("EnvelopeConfig constant bounds must straddle zero")


@dataclass(frozen=True)
class KinematicSet:
    """Final envelope plus its constituents for per-step diagnostics."""

    interval: Interval
    position: Interval
    viab_hi: float
    viab_lo: float
    velocity: Interval | None
    out_of_box: bool
    fallback: float | None  # braking singleton when the intersection is empty


def _position_upper(qd: float, d_ub: float, dt_p: float) -> float:
    # Largest constant qdd keeping q + qd*t + qdd*t^2/2 <= q_ub on [0, dt_p],
    # with d_ub = q_ub - q. The in-step peak sits at the endpoint unless
    # braking parks the vertex inside the horizon, in which case the vertex
    # height is the binding one.
    if qd <= 0.0 or d_ub >= 0.5 * qd * dt_p:
        return 2.0 * (d_ub - qd * dt_p) / (dt_p * dt_p)
    if d_ub <= 0.0:
        return -math.inf
    return -qd * qd / (2.0 * d_ub)


def position_envelope(q: float, qd: float, cfg: EnvelopeConfig, j: JointParams) -> Interval:
    """Exact admissible-acceleration interval from the position box.

    Out-of-box states degenerate to pure braking back toward the box (the
    loop must keep emitting commands after impacts); the interval can also
    come back empty for in-box states that can no longer stop in time.
    """
    if q > j.q_ub or q < j.q_lb:
        return _out_of_box_envelope(q, qd, cfg, j)
    hi = _position_upper(qd, j.q_ub - q, cfg.dt_p)
    lo = -_position_upper(-qd, q - j.q_lb, cfg.dt_p)
    if lo > hi:
        return Interval.empty_set()
    return Interval(lo, hi)


def _out_of_box_envelope(q: float, qd: float, cfg: EnvelopeConfig, j: JointParams) -> Interval:
    if q > j.q_ub:
        hi = -qd / cfg.dt_p if qd > 0.0 else 0.0
        return Interval(-math.inf, hi)
    lo = -qd / cfg.dt_p if qd < 0.0 else 0.0
    return Interval(lo, math.inf)


def is_out_of_box(q: float, j: JointParams) -> bool:
    return q > j.q_ub or q < j.q_lb


def braking_bound_from_av(a_v: Interval, qd: float) -> float:
    """Realizable deceleration toward the active bound: the endpoint of the
    voltage-realizable acceleration set that opposes the current velocity."""
    if a_v.empty:
        raise ValueError("no realizable braking: empty acceleration set")
    return a_v.lo if qd >= 0.0 else a_v.hi


def viability_upper(
    q: float, qd: float, qdd_max: float, cfg: EnvelopeConfig, j: JointParams
) -> float:
    """Acceleration cap keeping enough stopping distance below q_ub.

    qdd_max is the braking bound; its magnitude is used so the stopping
    distance is well defined regardless of the sign convention it arrived
    with. At or beyond the bound the cap is the full braking value.
    """
    brake = abs(qdd_max)
    headroom = j.q_ub - q
    if headroom <= 0.0:
        return -brake
    return (math.sqrt(2.0 * brake * headroom) - qd) / cfg.dt_p


def viability_lower(
    q: float, qd: float, qdd_max: float, cfg: EnvelopeConfig, j: JointParams
) -> float:
    """Mirror of viability_upper toward q_lb."""
    brake = abs(qdd_max)
    headroom = q - j.q_lb
    if headroom <= 0.0:
        return brake
    return (-math.sqrt(2.0 * brake * headroom) - qd) / cfg.dt_p


def _horizon_corrected_band(
    q: float, qd: float, brake: float, cfg: EnvelopeConfig, j: JointParams
) -> tuple[float, float]:
    """Stopping-distance caps that charge the in-step travel to the headroom.

    Variant of the viability band that solves, per bound, the quadratic
    (qd + T*qdd)^2 <= 2*brake*(headroom - T*qd - T^2*qdd/2) for qdd with
    T = dt_p. Falls back to the plain caps when the quadratic has no
    solution on the meaningful side.
    """
    T = cfg.dt_p
    caps = []
    for headroom, sign in ((j.q_ub - q, 1.0), (q - j.q_lb, -1.0)):
        v = qd * sign
        if headroom <= 0.0:
            caps.append(-brake)
            continue
        # a*x^2 + b*x + c <= 0 in x = sign*qdd
        a = T * T
        b = 2.0 * T * v + brake * T * T
        c = v * v - 2.0 * brake * (headroom - T * v)
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            caps.append(-brake)
            continue
        caps.append((-b + math.sqrt(disc)) / (2.0 * a))
    hi = caps[0]
    lo = -caps[1]
    return lo, hi


def discrete_velocity_envelope(qd: float, cfg: EnvelopeConfig, j: JointParams) -> Interval:
    """One-step velocity-bound envelope; its width scales with 1/dt_p."""
    return Interval(
        (-j.qd_ub - qd) / cfg.dt_p,
        (j.qd_ub - qd) / cfg.dt_p,
    )


def kinematic_set(
    q: float,
    qd: float,
    qdd_max: float,
    cfg: EnvelopeConfig,
    j: JointParams,
    mode: str = "vra",
) -> KinematicSet:
    """Intersection of the active kinematic envelopes.

    vra mode intersects the position envelope with the viability band and
    leaves the velocity bound to voltage feasibility; vbac mode adds the
    discrete velocity envelope and is driven by constant braking bounds.
    An empty intersection falls back to a braking singleton against the
    current direction of motion.
    """
    if mode not in KINEMATIC_MODES:
        raise ValueError(f"kinematic_set mode must be one of {KINEMATIC_MODES}")
    pos = position_envelope(q, qd, cfg, j)
    out = is_out_of_box(q, j)
    if mode == "vbac" and cfg.horizon_corrected and not out:
        v_lo, v_hi = _horizon_corrected_band(q, qd, abs(qdd_max), cfg, j)
    else:
        v_hi = viability_upper(q, qd, qdd_max, cfg, j)
        v_lo = viability_lower(q, qd, qdd_max, cfg, j)
    band = Interval(v_lo, v_hi) if v_lo <= v_hi else Interval.empty_set()
    result = pos.intersect(band)
    vel = None
    if mode == "vbac":
        vel = discrete_velocity_envelope(qd, cfg, j)
        result = result.intersect(vel)
    fallback = None
    if result.empty:
        fallback = -abs(qdd_max) if qd >= 0.0 else abs(qdd_max)
    return KinematicSet(
        interval=result,
        position=pos,
        viab_hi=v_hi,
        viab_lo=v_lo,
        velocity=vel,
        out_of_box=out,
        fallback=fallback,
    )
