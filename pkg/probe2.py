"""Inspect VRA braking-phase behavior near the position bound."""
import numpy as np
from vra.harness import scenario_from_dict, run_scenario


def brake_dict(controller, dt_p=0.001, q0=-0.85):
    return {
        "name": f"brake_{controller}",
        "controller": controller,
        "duration_s": 0.45,
        "motor": {"preset": "8115-like", "v_limit_from_velocity_bound": True},
        "envelope": {"dt_p": dt_p},
        "profile": {"type": "torque_step", "torque_nm": 30.0, "q0": q0, "qd0": 0.0},
    }


sc = scenario_from_dict(brake_dict("vra"))
tr = run_scenario(sc)[0]
q, qd = tr["q"], tr["qd"]
print(f"q_ub={sc.joint.q_ub}, overshoot={q.max()-sc.joint.q_ub:.3e}, qd over={qd.max()-10:.3e}")
# last steps before/at wall
hit = np.argmax(q)
for k in range(hit - 18, min(hit + 6, len(tr))):
    d = tr.diags[k]
    av = d.a_v
    kin = d.kin
    print(
        f"k={k} t={tr['time'][k]:.3f} q={q[k]:+.5f} qd={qd[k]:+.4f} "
        f"des={tr['qdd_des'][k]:+8.1f} cmd={tr['qdd_cmd'][k]:+9.1f} "
        f"iq={tr['iq'][k]:+7.2f} icmd={tr['iq_cmd'][k]:+7.2f} "
        f"av=[{av.lo:+9.1f},{av.hi:+9.1f}] "
        f"pos_hi={kin.position.hi if kin else float('nan'):+10.1f} "
        f"viab_hi={kin.viab_hi if kin else float('nan'):+10.1f} flags={int(tr['flags'][k])}"
    )
