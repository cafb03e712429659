"""Scratch probe for scenario tuning (not part of the package)."""
import numpy as np
from vra import *
from vra.harness import scenario_from_dict, run_scenario, boundary_window, near_boundary_metrics, realizable_fraction


def brake_dict(controller, dt_p=0.001, mis=None, seed=0):
    d = {
        "name": f"brake_{controller}",
        "controller": controller,
        "duration_s": 0.45,
        "seed": seed,
        "motor": {"preset": "8115-like", "v_limit_from_velocity_bound": True},
        "envelope": {"dt_p": dt_p},
        "profile": {"type": "torque_step", "torque_nm": 30.0, "q0": -1.1, "qd0": 0.0},
    }
    if mis:
        d["mismatch"] = mis
    return d


for ctrl in ("vra", "vbac-ab", "vbac-cb"):
    sc = scenario_from_dict(brake_dict(ctrl))
    tr = run_scenario(sc)[0]
    q, qd, sat = tr["q"], tr["qd"], tr["saturated"]
    frac = realizable_fraction(tr)
    w = boundary_window(tr)
    print(f"\n=== {ctrl} dt_p=0.001 v_limit={sc.motor.v_limit:.3f}")
    print(f"  q: max={q.max():.5f} (q_ub={sc.joint.q_ub}) overshoot={q.max()-sc.joint.q_ub:.2e}")
    print(f"  qd: max={qd.max():.4f} (qd_ub={sc.joint.qd_ub}) over={qd.max()-sc.joint.qd_ub:.2e}")
    print(f"  saturated steps={int(sat.sum())}/{len(tr)} frac={frac:.3f}")
    print(f"  window={w}")
    if w:
        m = near_boundary_metrics(tr, w)
        print(f"  success={m.success} dqd_max={m.dqd_max:.4f} dqd_rms={m.dqd_rms:.4f} dtau_rms={m.dtau_rms:.4f} f_zc={m.f_zc:.1f}")
    # where did saturation happen
    idx = np.flatnonzero(sat)
    if len(idx):
        print(f"  sat step ranges: first={idx[0]} last={idx[-1]} count={len(idx)}")
        print(f"  time of sat: {tr['time'][idx[0]]:.3f}..{tr['time'][idx[-1]]:.3f}")
