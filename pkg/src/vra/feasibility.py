"""Voltage-realizable current and acceleration sets.

Given one step of measured history, the admissible q-axis current is the
set of currents whose predicted dq voltage stays inside the budget circle
``|u| <= v_limit``. Two complementary predictions are used:

* a transient set: the voltage needed to slew the current from its
  previous value within one control period, and
* a quasi-steady set: the voltage needed after the speed has advanced by
  an s-step look-ahead under the candidate current.

Both reduce to a scalar quadratic inequality in the current, so the sets
are closed intervals computable in closed form. Unmodeled effects (supply
ripple, dead time, parameter error) are lumped into a residual voltage
estimated by comparing the nominal model against the voltage the drive
actually applied on the previous step, and folded into both predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actuator import JointParams, MotorParams, friction
from .intervals import Interval

TRANSIENT_MODES = ("inductive", "emf_scaled")

# Reason codes for an empty current set.
REASON_OK = ""
REASON_DISJOINT = "transient-steady conflict"
REASON_TRANSIENT_EMPTY = "transient empty"
REASON_STEADY_EMPTY = "steady empty"
REASON_BOTH_EMPTY = "both empty"


@dataclass(frozen=True)
class QuadCoeffs:
    """Coefficients of the inequality a*x^2 + b*x + c <= 0, with a >= 0."""

    a: float
    b: float
    c: float

    def evaluate(self, x: float) -> float:
        return (self.a * x + self.b) * x + self.c

    def vertex(self) -> float:
        """Minimizer of the quadratic; 0 for a degenerate flat one."""
        if self.a > 0.0:
            return -self.b / (2.0 * self.a)
        return 0.0


@dataclass(frozen=True)
class ControlFrame:
    """Measured history available when the step-k command is computed.

    The freshest sample (position, velocity, current, applied voltage)
    carries the previous step's index; the velocity one step older is kept
    for reconstructing the voltage that step should have needed.
    """

    q_prev: float     # latest measured position [rad]
    qd_prev: float    # latest measured velocity [rad/s]
    qd_prev2: float   # velocity one step older [rad/s]
    iq_prev: float    # latest measured q-axis current [A]
    ud_prev: float    # d-axis voltage applied last step [V]
    uq_prev: float    # q-axis voltage applied last step [V]
    dt: float         # execution step [s]
    s: int            # quasi-steady look-ahead step count

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("ControlFrame.dt must be strictly positive")
        if self.s < 1:
            raise ValueError("ControlFrame.s must be >= 1")


@dataclass(frozen=True)
class VoltageResidual:
    """Additive correction from applied-minus-nominal voltage of the last step.

    Zero when the plant matches the nominal model exactly. Adding it to the
    nominal prediction reproduces what the drive actually had to apply, so
    feasibility is evaluated against the plant as it behaves, not as it is
    modeled.
    """

    u_d: float  # [V]
    u_q: float  # [V]

    @staticmethod
    def zero() -> "VoltageResidual":
        return VoltageResidual(0.0, 0.0)


@dataclass(frozen=True)
class FeasibilityConfig:
    """Knobs of the current-set construction.

    transient_mode selects the slew term of the transient prediction:
    "inductive" prices the one-step current change at l_q/dt volts per
    ampere; "emf_scaled" prices it at p*qd*phi/dt, which makes the term
    vanish at standstill. i_max bounds the degenerate (flat-quadratic)
    sets that are otherwise unbounded.
    """

    i_max: float = 60.0
    transient_mode: str = "inductive"
    residual_alpha: float = 1.0  # 1.0 = no filtering

    def __post_init__(self):
        if not self.i_max > 0.0:
            raise ValueError("FeasibilityConfig.i_max must be strictly positive")
        if self.transient_mode not in TRANSIENT_MODES:
            raise ValueError(
                f"FeasibilityConfig.transient_mode must be one of {TRANSIENT_MODES}"
            )
        if not 0.0 < self.residual_alpha <= 1.0:
            raise ValueError("FeasibilityConfig.residual_alpha must be in (0, 1]")


def update_residual(
    m: MotorParams,
    f: ControlFrame,
    prev: VoltageResidual | None = None,
    alpha: float = 1.0,
) -> VoltageResidual:
    """Residual voltage from the last applied step, optionally low-passed.

    The nominal model is evaluated at the measured current with the
    velocity that was current when that command was issued; the difference
    to the voltage actually applied is the lumped unmodeled effect.
    """
    ud_nom = -m.p * f.qd_prev2 * f.iq_prev * m.l_q
    uq_nom = m.r_s * f.iq_prev + m.p * f.qd_prev2 * m.phi
    raw = VoltageResidual(f.ud_prev - ud_nom, f.uq_prev - uq_nom)
    if prev is None or alpha >= 1.0:
        return raw
    return VoltageResidual(
        alpha * raw.u_d + (1.0 - alpha) * prev.u_d,
        alpha * raw.u_q + (1.0 - alpha) * prev.u_q,
    )


def solve_quadratic_set(c: QuadCoeffs, i_max: float) -> Interval:
    """Solution interval of a*x^2 + b*x + c <= 0 with a >= 0.

    Degenerate (a = 0) half-line and full-line solutions are clamped to
    [-i_max, i_max]; genuine parabola solutions are returned as-is.
    """
    if c.a < 0.0:
        raise ValueError("solve_quadratic_set requires a >= 0")
    if c.a == 0.0:
        if c.b == 0.0:
            if c.c > 0.0:
                return Interval.empty_set()
            return Interval(-i_max, i_max)
        bound = -c.c / c.b
        if c.b > 0.0:
            return Interval(-math.inf, bound).clamp_to(-i_max, i_max)
        return Interval(bound, math.inf).clamp_to(-i_max, i_max)
    disc = c.b * c.b - 4.0 * c.a * c.c
    if disc < 0.0:
        return Interval.empty_set()
    sq = math.sqrt(disc)
    if c.b >= 0.0:
        t = -0.5 * (c.b + sq)
    else:
        t = -0.5 * (c.b - sq)
    if t == 0.0:
        x = -c.b / (2.0 * c.a)
        return Interval(x, x)
    r1 = t / c.a
    r2 = c.c / t
    return Interval(min(r1, r2), max(r1, r2))


def _norm_circle_coeffs(
    a_d: float, c_d: float, a_q: float, c_q: float, v_limit: float
) -> QuadCoeffs:
    # |(a_d*i + c_d, a_q*i + c_q)| <= v_limit, squared.
    return QuadCoeffs(
        a=a_d * a_d + a_q * a_q,
        b=2.0 * (a_d * c_d + a_q * c_q),
        c=c_d * c_d + c_q * c_q - v_limit * v_limit,
    )


def d_axis_terms(m: MotorParams, f: ControlFrame, r: VoltageResidual) -> tuple[float, float]:
    """Slope and intercept of the predicted d-axis voltage in the current."""
    return -m.p * f.qd_prev * m.l_q, r.u_d


def transient_coeffs(
    m: MotorParams, f: ControlFrame, r: VoltageResidual, mode: str = "inductive"
) -> QuadCoeffs:
    """Quadratic for the one-step transient voltage circle constraint."""
    a_d, c_d = d_axis_terms(m, f, r)
    if mode == "inductive":
        slew = m.l_q / f.dt
        a_q = m.r_s + slew
        c_q = -slew * f.iq_prev + m.p * f.qd_prev * m.phi + r.u_q
    elif mode == "emf_scaled":
        slew = m.p * f.qd_prev * m.phi / f.dt
        a_q = m.r_s + slew
        c_q = -slew * f.iq_prev + r.u_q
    else:
        raise ValueError(f"unknown transient mode {mode!r}")
    return _norm_circle_coeffs(a_d, c_d, a_q, c_q, m.v_limit)


def steady_coeffs(
    m: MotorParams, j: JointParams, f: ControlFrame, r: VoltageResidual
) -> QuadCoeffs:
    """Quadratic for the s-step look-ahead voltage circle constraint.

    The back-EMF is evaluated at the speed the candidate current would
    produce s steps ahead, which is what throttles current to zero as the
    speed approaches the budget speed.
    """
    a_d, c_d = d_axis_terms(m, f, r)
    a_q = m.r_s + m.k_t * f.s * f.dt * m.p * m.phi / j.inertia
    c_q = m.p * f.qd_prev * m.phi + r.u_q
    return _norm_circle_coeffs(a_d, c_d, a_q, c_q, m.v_limit)


def transient_set(
    m: MotorParams,
    f: ControlFrame,
    r: VoltageResidual,
    cfg: FeasibilityConfig = FeasibilityConfig(),
) -> Interval:
    return solve_quadratic_set(transient_coeffs(m, f, r, cfg.transient_mode), cfg.i_max)


def steady_set(
    m: MotorParams,
    j: JointParams,
    f: ControlFrame,
    r: VoltageResidual,
    cfg: FeasibilityConfig = FeasibilityConfig(),
) -> Interval:
    return solve_quadratic_set(steady_coeffs(m, j, f, r), cfg.i_max)


@dataclass(frozen=True)
class CurrentFeasibility:
    """Both voltage sets, their intersection, and the emptiness reason."""

    s_tr: Interval
    s_st: Interval
    iset: Interval
    reason: str
    tr_coeffs: QuadCoeffs
    st_coeffs: QuadCoeffs

    def least_violating_current(self) -> float:
        """Vertex minimizer of the transient quadratic, used when iset is empty."""
        return self.tr_coeffs.vertex()


def current_feasibility(
    m: MotorParams,
    j: JointParams,
    f: ControlFrame,
    r: VoltageResidual,
    cfg: FeasibilityConfig = FeasibilityConfig(),
) -> CurrentFeasibility:
    tr_c = transient_coeffs(m, f, r, cfg.transient_mode)
    st_c = steady_coeffs(m, j, f, r)
    s_tr = solve_quadratic_set(tr_c, cfg.i_max)
    s_st = solve_quadratic_set(st_c, cfg.i_max)
    iset = s_tr.intersect(s_st)
    if not iset.empty:
        reason = REASON_OK
    elif s_tr.empty and s_st.empty:
        reason = REASON_BOTH_EMPTY
    elif s_tr.empty:
        reason = REASON_TRANSIENT_EMPTY
    elif s_st.empty:
        reason = REASON_STEADY_EMPTY
    else:
        reason = REASON_DISJOINT
    return CurrentFeasibility(s_tr, s_st, iset, reason, tr_c, st_c)


def realizable_current_set(
    m: MotorParams,
    j: JointParams,
    f: ControlFrame,
    r: VoltageResidual,
    cfg: FeasibilityConfig = FeasibilityConfig(),
) -> Interval:
    """Intersection of the transient and quasi-steady current sets."""
    return current_feasibility(m, j, f, r, cfg).iset


def realizable_accel_set(
    iset: Interval, m: MotorParams, j: JointParams, qd: float
) -> Interval:
    """Affine image of the current set in acceleration space."""
    return iset.scale_shift(m.k_t / j.inertia, -friction(j, qd) / j.inertia)


def velocity_budget(m: MotorParams, qd_ub: float) -> float:
    """Voltage budget whose zero-current steady set degenerates exactly at qd_ub.

    Running with this budget absorbs the velocity bound into voltage
    feasibility: back-EMF consumes the whole budget at qd_ub, so no
    accelerating current remains beyond it.
    """
    if not qd_ub > 0.0:
        raise ValueError("velocity_budget requires qd_ub > 0")
    return m.p * qd_ub * m.phi
