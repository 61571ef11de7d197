"""Acceptance suite: end-to-end mission criteria at full resolution (h = 1 s).

Each criterion prints one PASS/FAIL line (run pytest with -s or check the
captured output).  Expected total runtime is a few minutes, dominated by the
nonlinear falsification batch and the robustness sweep.
"""

import time

import numpy as np
import pytest

from rdvsafe import (
    StarSet,
    bounding_box,
    cwh_matrices,
    default_scenario,
    design_mode_gains,
    falsify,
    monte_carlo_containment,
    propagate,
    solve_care,
    support,
    sweep_passive_time,
    verify,
    violates_halfspace,
)
from rdvsafe.cli import cli_main
from rdvsafe.lqr import (
    DEFAULT_MAX_INPUT,
    PROXA_MAX_STATE,
    PROXB_MAX_STATE,
    Weights,
    bryson_weights,
    care_residual,
)
from rdvsafe.numsim import MODE_PROX_B
from rdvsafe.verifier import simulate_scenario


def _report(num, ok, detail=""):
    print(f"\n[ACCEPTANCE {num}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} failed: {detail}"


@pytest.fixture(scope="module")
def lin_report():
    sc = default_scenario()
    t0 = time.perf_counter()
    rep = verify(sc)
    rep.wall_time_s = time.perf_counter() - t0
    return rep


@pytest.fixture(scope="module")
def tracking_report():
    return verify(default_scenario(variant="lin_prox_th_tracking"))


def test_criterion_1_default_mission_safety(lin_report):
    ok = lin_report.verdict == "safe" and lin_report.wall_time_s <= 60.0
    _report(1, ok,
            f"default mission verdict={lin_report.verdict} in {lin_report.wall_time_s:.2f}s "
            f"({lin_report.steps_total} reach steps, "
            f"{len([v for v in lin_report.violations])} violations)")


def test_criterion_2_thrust_margin(tracking_report):
    rep = tracking_report
    thrust_viols = [v for v in rep.violations if v.property.startswith("thrust")]
    ok = (rep.verdict == "safe" and not thrust_viols
          and rep.max_thrust_n is not None and rep.max_thrust_n < 10.0)
    _report(2, ok,
            f"thrust-tracking verdict={rep.verdict}, peak |u| = {rep.max_thrust_n:.3f} N, "
            f"margin = {rep.thrust_margin_n:.3f} N below the 10 N limit")


def test_criterion_3_coarse_variant_dominates(tracking_report):
    rep_ex = verify(default_scenario(variant="lin_prox_th_explicit"))
    seg_tr = tracking_report.segments[0]
    seg_ex = rep_ex.segments[0]
    n = min(seg_tr.n_steps, seg_ex.n_steps)
    w_tr = (seg_tr.hi - seg_tr.lo)[:n, :2]
    w_ex = (seg_ex.hi - seg_ex.lo)[:n, :2]
    dominates = bool(np.all(w_ex >= w_tr - 1e-9))
    strict = bool(np.any(w_ex > w_tr + 1e-9))
    _report(3, dominates and strict,
            f"explicit-thrust position widths dominate tracking widths over {n} common "
            f"steps (max ratio {float((w_ex[-1] / w_tr[-1]).max()):.1f}x at the last one)")


def test_criterion_4_robustness_sweep_shape():
    sc = default_scenario()
    angles = [135.0, 160.0, 180.0, 200.0, 225.0, 230.0]
    t_grid = list(np.arange(600.0, 16200.0 + 1.0, 600.0))
    t0 = time.perf_counter()
    rows = sweep_passive_time(sc, angles, 950.0, w=300.0, t_grid=t_grid)
    wall = time.perf_counter() - t0
    by_angle = {a: t for a, _r, t in rows}
    ordering = by_angle[180.0] >= by_angle[135.0] and by_angle[180.0] >= by_angle[225.0]
    never_230 = by_angle[230.0] == -1.0
    ok = ordering and never_230 and wall <= 900.0
    _report(4, ok,
            "sweep max-safe-T by angle: "
            + ", ".join(f"{a:g}deg={'never' if by_angle[a] < 0 else f'{by_angle[a]:g}s'}"
                        for a in angles)
            + f" ({wall:.1f}s)")


def test_criterion_5_star_exactness_suite():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        star = StarSet(x0=rng.normal(scale=5.0, size=4), V=rng.normal(size=(4, 4)))
        phi = rng.normal(scale=0.6, size=(4, 4))
        moved = propagate(star, phi)
        corners = moved.corners()
        a = rng.normal(size=4)
        b = rng.normal(scale=4.0)
        oracle = float((corners @ a).max())
        got = support(moved, a)
        worst = max(worst, abs(got - oracle) / max(1.0, abs(oracle)))
        assert abs(got - oracle) <= 1e-9 * max(1.0, abs(oracle))
        if abs(oracle - b) > 1e-9 * max(1.0, abs(b)):
            assert violates_halfspace(moved, a, b) == (oracle >= b)
    box = bounding_box(StarSet(x0=np.array([1.0, 2.0]),
                               V=np.array([[1.0, 1.0], [0.0, 1.0]])))
    worked = (np.array_equal(box.lo, [-1.0, 1.0]) and np.array_equal(box.hi, [3.0, 3.0]))
    _report(5, worked,
            f"1000 random propagated stars match the corner oracle "
            f"(worst support deviation {worst:.2e}); worked box example exact")


def test_criterion_6_containment_soundness(lin_report):
    res = monte_carlo_containment(default_scenario(), 1000, report=lin_report)
    ok = res["violations"] == 0
    _report(6, ok,
            f"1000 sampled closed-loop runs stayed inside the reach boxes over "
            f"{res['checked_steps']} steps (max excess {res['max_excess']:.2e} m)")


def test_criterion_7_controller_certificates():
    params = default_scenario().params
    model = cwh_matrices(params)
    B_acc = params.m_c * model.B
    k1, k2 = design_mode_gains(params)
    details = []
    ok = True
    for name, gain, ms in (("far", k1, PROXA_MAX_STATE), ("close", k2, PROXB_MAX_STATE)):
        w = bryson_weights(ms, DEFAULT_MAX_INPUT)
        res = care_residual(model.A, B_acc, w, gain.P)
        tol = 1e-8 * np.linalg.norm(w.Q, "fro")
        alpha = float(np.max(np.linalg.eigvals(model.A - B_acc @ gain.K).real))
        ok = ok and res <= tol and alpha < 0.0
        details.append(f"{name}: residual {res:.2e} <= {tol:.2e}, abscissa {alpha:.2e}")
    dbl = solve_care(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]),
                     Weights(Q=np.eye(2), R=np.eye(1)))
    dbl_ok = np.allclose(dbl.K, [[1.0, np.sqrt(3.0)]], atol=1e-8)
    ok = ok and dbl_ok
    _report(7, ok, "; ".join(details) + f"; double-integrator gain exact: {dbl_ok}")


def test_criterion_8_nonlinear_consistency():
    sc_nl = default_scenario(variant="nlin_prox")
    cx = falsify(sc_nl, 100)
    sc_lin = default_scenario()
    center = sc_lin.init.mid()[:4]
    lin = simulate_scenario(sc_lin, center, None)
    nl = simulate_scenario(sc_nl, center, None)
    entry = next(k for k, m in enumerate(lin.modes) if m == MODE_PROX_B)
    diff = float(np.hypot(*(lin.states[entry][:2] - nl.states[entry][:2])))
    ok = cx is None and diff <= 5.0
    _report(8, ok,
            f"100 nonlinear falsification runs clean; linear-vs-nonlinear position "
            f"difference at the close-range entry (t={entry}s): {diff:.2e} m <= 5 m")


def test_criterion_9_determinism(tmp_path):
    doc = ('{"step_s": 5.0, "seed": 42, '
           '"properties": {"separation_halfwidth_m": 50.0}}')
    sc_path = tmp_path / "sc.json"
    sc_path.write_text(doc)
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        assert cli_main(["verify", str(sc_path), "--out", str(out)]) == 1
        assert cli_main(["falsify", str(sc_path), "--samples", "6",
                         "--out", str(out)]) == 1
        assert cli_main(["plot", str(out / "report.json"), "--plane", "xy"]) == 0
        outs.append(out)
    files = ["report.json", "flowpipe.csv", "counterexample.csv", "plot_xy.svg"]
    identical = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
                    for f in files)
    _report(9, identical,
            f"repeated verify/falsify/plot runs byte-identical across {files}")
