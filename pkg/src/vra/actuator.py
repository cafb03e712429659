"""Single-joint PMSM actuator parameterization and algebraic maps.

Everything here is the nominal model: dq voltages from speed and current,
torque/current/acceleration conversions, and the friction law. The joint
velocity maps to electrical velocity through the constant ``p``, which
folds pole pairs and gear ratio together, so all mechanical quantities are
joint-side while electrical quantities are motor-side.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class MotorParams:
    """Electrical constants and voltage budgets.

    v_limit is the budget the feasibility sets are evaluated against;
    v_bus is the physical DC-link ceiling enforced by the drive.
    """

    l_q: float      # q-axis inductance [H]
    r_s: float      # stator resistance [ohm]
    phi: float      # flux linkage [Wb]
    p: float        # joint velocity -> electrical velocity [dimensionless]
    k_t: float      # joint-side torque constant [Nm/A]
    v_bus: float    # DC-link voltage [V]
    v_limit: float  # usable voltage budget [V], <= v_bus

    def __post_init__(self):
        for name in ("l_q", "r_s", "phi", "p", "k_t", "v_bus", "v_limit"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"MotorParams.{name} must be strictly positive")
        if self.v_limit > self.v_bus:
            raise ValueError("MotorParams.v_limit must not exceed v_bus")

    def with_budget(self, v_limit: float) -> "MotorParams":
        return replace(self, v_limit=v_limit)


@dataclass(frozen=True)
class JointParams:
    """Mechanical constants and kinematic limits of the joint."""

    inertia: float   # M [kg m^2]
    viscous: float   # b [Nm s/rad]
    coulomb: float   # tau_c [Nm]
    q_lb: float      # position lower bound [rad]
    q_ub: float      # position upper bound [rad]
    qd_ub: float     # velocity bound [rad/s]

    def __post_init__(self):
        if not self.inertia > 0.0:
            raise ValueError("JointParams.inertia must be strictly positive")
        if self.viscous < 0.0 or self.coulomb < 0.0:
            raise ValueError("JointParams friction coefficients must be >= 0")
        if not self.q_lb < self.q_ub:
            raise ValueError("JointParams requires q_lb < q_ub")
        if not self.qd_ub > 0.0:
            raise ValueError("JointParams.qd_ub must be strictly positive")


@dataclass(frozen=True)
class JointState:
    """One measurement sample: position, velocity, q-axis current."""

    q: float    # [rad]
    qd: float   # [rad/s]
    iq: float   # [A]


def dq_voltage(m: MotorParams, qd: float, iq: float) -> tuple[float, float]:
    """Steady dq voltages for a given joint speed and q-axis current (i_d = 0)."""
    u_d = -m.p * qd * m.l_q * iq
    u_q = m.r_s * iq + m.p * qd * m.phi
    return u_d, u_q


def torque_from_current(m: MotorParams, iq: float) -> float:
    return m.k_t * iq


def friction(j: JointParams, qd: float) -> float:
    """Viscous plus Coulomb resistance torque, with sign(0) = 0."""
    sign = float(qd > 0.0) - float(qd < 0.0)
    return j.viscous * qd + j.coulomb * sign


def current_from_accel(m: MotorParams, j: JointParams, qdd: float, qd: float) -> float:
    """Inverse dynamics: q-axis current producing acceleration qdd at speed qd."""
    return (j.inertia * qdd + friction(j, qd)) / m.k_t


def accel_from_current(m: MotorParams, j: JointParams, iq: float, qd: float) -> float:
    """Forward dynamics: acceleration produced by current iq at speed qd."""
    return (m.k_t * iq - friction(j, qd)) / j.inertia


@dataclass(frozen=True)
class ActuatorPreset:
    """A named motor/joint pairing plus the drive current rating."""

    name: str
    motor: MotorParams
    joint: JointParams
    i_max: float  # drive continuous current rating [A]


# Two documented presets. The values are repo conventions chosen to be
# physically plausible for quasi-direct-drive actuators of these frame
# sizes and to make 30 Nm / 20 Nm torque steps representable; they are not
# vendor datasheet numbers.
PRESETS: dict[str, ActuatorPreset] = {
    # High torque, low speed. 21 pole pairs behind a 9:1 reduction.
    "8115-like": ActuatorPreset(
        name="8115-like",
        motor=MotorParams(
            l_q=3.0e-4, r_s=0.10, phi=0.008, p=189.0, k_t=2.268,
            v_bus=24.0, v_limit=24.0,
        ),
        joint=JointParams(
            inertia=0.05, viscous=0.05, coulomb=0.0,
            q_lb=-1.2, q_ub=1.2, qd_ub=10.0,
        ),
        i_max=60.0,
    ),
    # Lower torque, higher speed. 14 pole pairs behind a 9:1 reduction.
    "6210-like": ActuatorPreset(
        name="6210-like",
        motor=MotorParams(
            l_q=1.2e-4, r_s=0.10, phi=0.006, p=126.0, k_t=1.134,
            v_bus=24.0, v_limit=24.0,
        ),
        joint=JointParams(
            inertia=0.02, viscous=0.03, coulomb=0.0,
            q_lb=-1.2, q_ub=1.2, qd_ub=15.0,
        ),
        i_max=40.0,
    ),
}


def get_preset(name: str) -> ActuatorPreset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown actuator preset {name!r} (known: {known})") from None
