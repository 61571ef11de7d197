"""Scenario files, report/flowpipe/plot emission, and the command line.

Scenarios are JSON, reports are JSON, flowpipes are CSV, plots are SVG.  All
numeric serialization uses 17 significant digits so doubles round-trip
exactly, and every emitted file is deterministic for a fixed scenario and
seed (wall-clock timing is never written).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .hybrid import (
    GUARD_RADIUS_M,
    LOS_BASE_X_M,
    LOS_HALF_ANGLE_DEG,
    SEPARATION_HALFWIDTH_M,
    THRUST_LIMIT_N,
    VELOCITY_LIMIT_MPS,
)
from .lqr import DEFAULT_MAX_INPUT, PROXA_MAX_STATE, PROXB_MAX_STATE
from .numsim import MODE_PASSIVE, MODE_PROX_A, MODE_PROX_B
from .orbital import OrbitalParams
from .starset import Box
from .verifier import (
    FlowpipeSegment,
    Scenario,
    VerificationReport,
    falsify,
    sample_initial_points,
    simulate_scenario,
    sweep_passive_time,
    verify,
    verify_windowed,
)

_SCENARIO_KEYS = (
    "variant", "mu", "r_orbit", "m_c", "init_center", "init_halfwidth",
    "t1_s", "t2_s", "horizon_s", "step_s", "window_width_s",
    "bryson", "properties", "seed",
)
_PROPERTY_KEYS = (
    "separation_halfwidth_m", "velocity_limit_mps", "thrust_limit_n",
    "los_base_x_m", "los_half_angle_deg", "intersample_bloat",
)

_PLANES = {"xy": (0, 1), "vxvy": (2, 3), "uxuy": (4, 5)}
_MODE_COLORS = {MODE_PROX_A: "#5b8fd6", MODE_PROX_B: "#58b06a", MODE_PASSIVE: "#9a9a9a"}


class ScenarioError(ValueError):
    """Scenario file problem, carrying a JSON pointer to the offending field."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _require_number(val, pointer: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(pointer, f"expected a number, got {type(val).__name__}")
    if not math.isfinite(val):
        raise ScenarioError(pointer, "value must be finite")
    return float(val)


def _require_vector(val, pointer: str, lengths=(4,)) -> list[float]:
    if not isinstance(val, list) or len(val) not in lengths:
        raise ScenarioError(pointer, f"expected a list of length {' or '.join(map(str, lengths))}")
    return [_require_number(v, f"{pointer}/{i}") for i, v in enumerate(val)]


def _parse_bryson(raw, pointer: str) -> dict:
    if not isinstance(raw, dict):
        raise ScenarioError(pointer, "expected an object")
    out: dict = {}
    for key, val in raw.items():
        if key == "max_input":
            out[key] = _require_vector(val, f"{pointer}/max_input", lengths=(2,))
        elif key in ("prox_a", "prox_b"):
            if not isinstance(val, dict):
                raise ScenarioError(f"{pointer}/{key}", "expected an object")
            sub = {}
            for k2, v2 in val.items():
                if k2 != "max_state":
                    raise ScenarioError(f"{pointer}/{key}/{k2}", "unknown key")
                sub["max_state"] = _require_vector(v2, f"{pointer}/{key}/max_state")
            out[key] = sub
        else:
            raise ScenarioError(f"{pointer}/{key}", "unknown key")
    return out


def _parse_properties(raw, pointer: str) -> dict:
    if not isinstance(raw, dict):
        raise ScenarioError(pointer, "expected an object")
    out = {}
    for key, val in raw.items():
        if key not in _PROPERTY_KEYS:
            raise ScenarioError(f"{pointer}/{key}", "unknown key")
        if key == "intersample_bloat":
            if not isinstance(val, bool):
                raise ScenarioError(f"{pointer}/{key}", "expected a boolean")
            out[key] = val
        else:
            out[key] = _require_number(val, f"{pointer}/{key}")
    return out


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("", "scenario document must be a JSON object")
    for key in doc:
        if key not in _SCENARIO_KEYS:
            raise ScenarioError(f"/{key}", "unknown key")

    variant = doc.get("variant", "lin_prox")
    if not isinstance(variant, str):
        raise ScenarioError("/variant", "expected a string")
    mu = _require_number(doc.get("mu", OrbitalParams().mu), "/mu")
    r_orbit = _require_number(doc.get("r_orbit", OrbitalParams().r), "/r_orbit")
    m_c = _require_number(doc.get("m_c", OrbitalParams().m_c), "/m_c")
    center = _require_vector(doc.get("init_center", list(np.array([-900.0, -400.0, 0.0, 0.0]))),
                             "/init_center", lengths=(4, 6))
    halfwidth = _require_vector(doc.get("init_halfwidth", [25.0, 25.0, 0.0, 0.0]),
                                "/init_halfwidth", lengths=(len(center),))
    t1 = _require_number(doc.get("t1_s", 7200.0), "/t1_s")
    t2 = _require_number(doc.get("t2_s", 7500.0), "/t2_s")
    horizon = _require_number(doc.get("horizon_s", 16200.0), "/horizon_s")
    step = _require_number(doc.get("step_s", 1.0), "/step_s")
    window = _require_number(doc.get("window_width_s", 300.0), "/window_width_s")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError("/seed", "expected an integer")
    bryson = _parse_bryson(doc["bryson"], "/bryson") if "bryson" in doc else None
    props = _parse_properties(doc["properties"], "/properties") if "properties" in doc else None

    if mu <= 0.0:
        raise ScenarioError("/mu", "must be positive")
    if r_orbit <= 0.0:
        raise ScenarioError("/r_orbit", "must be positive")
    if m_c <= 0.0:
        raise ScenarioError("/m_c", "must be positive")
    if any(hw < 0.0 for hw in halfwidth):
        raise ScenarioError("/init_halfwidth", "half-widths must be nonnegative")
    if t1 < 0.0 or t1 > t2:
        raise ScenarioError("/t1_s", "need 0 <= t1 <= t2")
    if t2 > horizon:
        raise ScenarioError("/t2_s", "abort window must end by the horizon")
    if step <= 0.0:
        raise ScenarioError("/step_s", "must be positive")
    if window <= 0.0:
        raise ScenarioError("/window_width_s", "must be positive")

    c = np.array(center)
    hw = np.array(halfwidth)
    try:
        return Scenario(
            params=OrbitalParams(mu=mu, r=r_orbit, m_c=m_c),
            variant=variant,
            init=Box(lo=c - hw, hi=c + hw),
            t1=t1, t2=t2, horizon=horizon, h=step, window_width=window,
            bryson=bryson, property_overrides=props, seed=seed,
        )
    except ValueError as exc:
        raise ScenarioError("", str(exc)) from exc


def load_scenario(path: str) -> Scenario:
    """Read and validate a scenario file; absent keys take mission defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError("", f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def scenario_to_dict(sc: Scenario) -> dict:
    """Canonical fully-populated form of a scenario (the config echo)."""
    br = sc.bryson or {}
    props = dict(sc.property_overrides or {})
    return {
        "variant": sc.variant,
        "mu": sc.params.mu,
        "r_orbit": sc.params.r,
        "m_c": sc.params.m_c,
        "init_center": [float(v) for v in sc.init.mid()],
        "init_halfwidth": [float(v) for v in sc.init.halfwidth()],
        "t1_s": sc.t1,
        "t2_s": sc.t2,
        "horizon_s": sc.horizon,
        "step_s": sc.h,
        "window_width_s": sc.window_width,
        "seed": sc.seed,
        "bryson": {
            "prox_a": {"max_state": [float(v) for v in br.get("prox_a", {}).get("max_state", PROXA_MAX_STATE)]},
            "prox_b": {"max_state": [float(v) for v in br.get("prox_b", {}).get("max_state", PROXB_MAX_STATE)]},
            "max_input": [float(v) for v in br.get("max_input", DEFAULT_MAX_INPUT)],
        },
        "properties": {
            "separation_halfwidth_m": float(props.get("separation_halfwidth_m", SEPARATION_HALFWIDTH_M)),
            "velocity_limit_mps": float(props.get("velocity_limit_mps", VELOCITY_LIMIT_MPS)),
            "thrust_limit_n": float(props.get("thrust_limit_n", THRUST_LIMIT_N)),
            "los_base_x_m": float(props.get("los_base_x_m", LOS_BASE_X_M)),
            "los_half_angle_deg": float(props.get("los_half_angle_deg", LOS_HALF_ANGLE_DEG)),
            "intersample_bloat": bool(props.get("intersample_bloat", False)),
        },
    }


def save_scenario(sc: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(sc), fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# report and flowpipe emission


def report_to_dict(report: VerificationReport, flowpipe_csv: str | None = None) -> dict:
    k1, k2 = report.gains
    return {
        "tool": "rdvsafe",
        "version": __version__,
        "verdict": report.verdict,
        "reason": report.reason,
        "config": scenario_to_dict(report.scenario),
        "gains": {
            "prox_a": {"K": k1.K.tolist(), "P": k1.P.tolist()},
            "prox_b": {"K": k2.K.tolist(), "P": k2.P.tolist()},
        },
        "pipes": [
            {"mode": seg.mode, "steps": seg.n_steps,
             "t_start_earliest_s": seg.t_lo0, "t_start_latest_s": seg.t_hi0}
            for seg in report.segments
        ],
        "steps_total": report.steps_total,
        "max_thrust_n": report.max_thrust_n,
        "thrust_margin_n": report.thrust_margin_n,
        "violations": [
            {"property": v.property, "mode": v.mode, "time_s": v.time_s, "step": v.step,
             "witness_lo": [float(x) for x in v.witness_lo],
             "witness_hi": [float(x) for x in v.witness_hi],
             "confirmed": v.confirmed}
            for v in report.violations
        ],
        "flowpipe_csv": flowpipe_csv,
    }


def emit_report(report: VerificationReport, path: str, flowpipe_csv: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report, flowpipe_csv), fh, sort_keys=True, indent=2)
        fh.write("\n")


def emit_flowpipe(report: VerificationReport, path: str) -> None:
    """Write every pipe's per-step boxes: step,time_s,mode,lo_*,hi_*,flags."""
    dim = report.segments[0].dim if report.segments else 0
    header = (
        ["step", "time_s", "mode"]
        + [f"lo_{d + 1}" for d in range(dim)]
        + [f"hi_{d + 1}" for d in range(dim)]
        + ["flags"]
    )
    lines = [",".join(header)]
    for seg in report.segments:
        flags: dict[int, list[str]] = {}
        for k, name in seg.violations:
            flags.setdefault(k, []).append(name)
        times = seg.times_lo()
        for k in range(seg.n_steps):
            nums = [_fmt(times[k])] + [_fmt(v) for v in seg.lo[k]] + [_fmt(v) for v in seg.hi[k]]
            flag = ";".join(sorted(flags.get(k, ())))
            lines.append(f"{k},{nums[0]},{seg.mode}," + ",".join(nums[1:]) + f",{flag}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_flowpipe_csv(path: str) -> list[FlowpipeSegment]:
    """Rebuild pipe segments from a flowpipe CSV (step 0 starts a new pipe).

    The CSV stores one time per step (the earliest covered), so the
    reconstructed segments carry a degenerate step-0 time range.
    """
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.rstrip("\n") for line in fh if line.strip()]
    header = rows[0].split(",")
    dim = (len(header) - 4) // 2
    segments: list[FlowpipeSegment] = []
    cur: list[tuple[str, float, list[float], str]] = []

    def close():
        if not cur:
            return
        arr = np.array([vals for _m, _t, vals, _f in cur])
        times = [t for _m, t, _v, _f in cur]
        viol = []
        for k, (_m, _t, _v, flag) in enumerate(cur):
            if flag:
                viol.extend((k, name) for name in flag.split(";"))
        segments.append(FlowpipeSegment(
            mode=cur[0][0], lo=arr[:, :dim], hi=arr[:, dim:],
            t_lo0=times[0], t_hi0=times[0],
            h=(times[1] - times[0]) if len(times) > 1 else 1.0,
            violations=viol,
        ))

    for line in rows[1:]:
        parts = line.split(",")
        if int(parts[0]) == 0:
            close()
            cur = []
        cur.append((parts[2], float(parts[1]),
                    [float(v) for v in parts[3:3 + 2 * dim]], parts[3 + 2 * dim]))
    close()
    return segments


# ---------------------------------------------------------------------------
# SVG plotting

_MAX_RECTS_PER_PIPE = 2000


def _plane_overlays(plane: str, sc: Scenario):
    props = sc.property_overrides or {}
    shapes = []
    if plane == "xy":
        verts = [(GUARD_RADIUS_M * math.cos(math.radians(45 * k)),
                  GUARD_RADIUS_M * math.sin(math.radians(45 * k))) for k in range(8)]
        shapes.append(("polygon", verts, "#d08030", "guard octagon"))
        base = float(props.get("los_base_x_m", LOS_BASE_X_M))
        ang = math.radians(float(props.get("los_half_angle_deg", LOS_HALF_ANGLE_DEG)))
        t = math.tan(ang)
        shapes.append(("polygon", [(0.0, 0.0), (base, -base * t), (base, base * t)],
                       "#c04040", "line of sight"))
        hw = float(props.get("separation_halfwidth_m", SEPARATION_HALFWIDTH_M))
        shapes.append(("polygon", [(-hw, -hw), (hw, -hw), (hw, hw), (-hw, hw)],
                       "#000000", "separation box"))
    elif plane == "vxvy":
        lim = float(props.get("velocity_limit_mps", VELOCITY_LIMIT_MPS))
        verts = [(lim * math.cos(math.radians(22.5 + 45 * k)),
                  lim * math.sin(math.radians(22.5 + 45 * k))) for k in range(8)]
        shapes.append(("polygon", verts, "#c04040", "velocity bound"))
    elif plane == "uxuy":
        lim = float(props.get("thrust_limit_n", THRUST_LIMIT_N))
        shapes.append(("limits", lim, "#c04040", "thrust limit"))
    return shapes


def emit_plot_segments(segments: list[FlowpipeSegment], sc: Scenario, plane: str,
                       path: str) -> None:
    if plane not in _PLANES:
        raise ValueError(f"unknown plane {plane!r}; expected one of {sorted(_PLANES)}")
    d0, d1 = _PLANES[plane]
    if not segments:
        raise ValueError("nothing to plot: empty flowpipe")
    dim = segments[0].dim
    if d1 >= dim:
        raise ValueError(f"plane {plane!r} unavailable for a {dim}-dimensional flowpipe")

    overlays = _plane_overlays(plane, sc)
    xs, ys = [], []
    for seg in segments:
        xs += [seg.lo[:, d0].min(), seg.hi[:, d0].max()]
        ys += [seg.lo[:, d1].min(), seg.hi[:, d1].max()]
    for shape in overlays:
        if shape[0] == "polygon":
            xs += [p[0] for p in shape[1]]
            ys += [p[1] for p in shape[1]]
        else:
            xs += [shape[1], -shape[1]]
            ys += [shape[1], -shape[1]]
    xmin, xmax = float(min(xs)), float(max(xs))
    ymin, ymax = float(min(ys)), float(max(ys))
    xpad = 0.05 * (xmax - xmin or 1.0)
    ypad = 0.05 * (ymax - ymin or 1.0)
    xmin, xmax = xmin - xpad, xmax + xpad
    ymin, ymax = ymin - ypad, ymax + ypad

    W, H = 900.0, 680.0
    L, R, T, B = 70.0, 20.0, 20.0, 50.0

    def px(x):
        return L + (x - xmin) / (xmax - xmin) * (W - L - R)

    def py(y):
        return T + (ymax - y) / (ymax - ymin) * (H - T - B)

    labels = {"xy": ("x [m]", "y [m]"), "vxvy": ("vx [m/s]", "vy [m/s]"),
              "uxuy": ("ux [N]", "uy [N]")}[plane]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:g}" height="{H:g}" '
        f'viewBox="0 0 {W:g} {H:g}" data-xmin="{_fmt(xmin)}" data-xmax="{_fmt(xmax)}" '
        f'data-ymin="{_fmt(ymin)}" data-ymax="{_fmt(ymax)}" data-left="{_fmt(L)}" '
        f'data-right="{_fmt(W - R)}" data-top="{_fmt(T)}" data-bottom="{_fmt(H - B)}">',
        f'<rect x="{L:g}" y="{T:g}" width="{W - L - R:g}" height="{H - T - B:g}" '
        'fill="white" stroke="#333333"/>',
    ]
    for seg in segments:
        color = _MODE_COLORS.get(seg.mode, "#777777")
        stride = max(1, -(-seg.n_steps // _MAX_RECTS_PER_PIPE))
        ks = list(range(0, seg.n_steps, stride))
        if ks[-1] != seg.n_steps - 1:
            ks.append(seg.n_steps - 1)
        out.append(f'<g fill="{color}" fill-opacity="0.25" class="pipe-{seg.mode}">')
        for k in ks:
            x0, x1 = seg.lo[k, d0], seg.hi[k, d0]
            y0, y1 = seg.lo[k, d1], seg.hi[k, d1]
            out.append(
                f'<rect x="{_fmt(px(x0))}" y="{_fmt(py(y1))}" '
                f'width="{_fmt(px(x1) - px(x0))}" height="{_fmt(py(y0) - py(y1))}"/>'
            )
        out.append("</g>")
    for shape in overlays:
        if shape[0] == "polygon":
            pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in shape[1])
            out.append(f'<polygon points="{pts}" fill="none" stroke="{shape[2]}" '
                       f'stroke-width="1.5"><title>{shape[3]}</title></polygon>')
        else:
            lim = shape[1]
            for v in (lim, -lim):
                out.append(f'<line x1="{_fmt(px(v))}" y1="{_fmt(py(ymin))}" x2="{_fmt(px(v))}" '
                           f'y2="{_fmt(py(ymax))}" stroke="{shape[2]}" stroke-dasharray="4 3"/>')
                out.append(f'<line x1="{_fmt(px(xmin))}" y1="{_fmt(py(v))}" x2="{_fmt(px(xmax))}" '
                           f'y2="{_fmt(py(v))}" stroke="{shape[2]}" stroke-dasharray="4 3"/>')
    out.append(f'<text x="{(L + W - R) / 2:g}" y="{H - 12:g}" text-anchor="middle" '
               f'font-size="14">{labels[0]}</text>')
    out.append(f'<text x="18" y="{(T + H - B) / 2:g}" text-anchor="middle" font-size="14" '
               f'transform="rotate(-90 18 {(T + H - B) / 2:g})">{labels[1]}</text>')
    out.append(f'<text x="{L:g}" y="{H - B + 16:g}" font-size="11">{_fmt(xmin)}</text>')
    out.append(f'<text x="{W - R:g}" y="{H - B + 16:g}" text-anchor="end" font-size="11">'
               f'{_fmt(xmax)}</text>')
    out.append(f'<text x="{L - 4:g}" y="{H - B:g}" text-anchor="end" font-size="11">'
               f'{_fmt(ymin)}</text>')
    out.append(f'<text x="{L - 4:g}" y="{T + 10:g}" text-anchor="end" font-size="11">'
               f'{_fmt(ymax)}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def emit_plot(report: VerificationReport, plane: str, path: str) -> None:
    emit_plot_segments(report.segments, report.scenario, plane, path)


def _emit_sweep_csv(rows, path):
    lines = ["angle_deg,radius_m,max_safe_T_s"]
    for angle, radius, max_t in rows:
        lines.append(f"{_fmt(angle)},{_fmt(radius)},{_fmt(max_t)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _emit_sweep_svg(rows, horizon, path):
    """Polar map of the largest safe abort deadline per bearing."""
    W = H = 640.0
    cx = cy = W / 2.0
    r_in, r_out = 120.0, 280.0
    if len(rows) > 1:
        step = min(abs(b[0] - a[0]) for a, b in zip(rows, rows[1:])) or 5.0
    else:
        step = 5.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:g}" height="{H:g}" '
           f'viewBox="0 0 {W:g} {H:g}">',
           f'<circle cx="{cx:g}" cy="{cy:g}" r="{r_out:g}" fill="none" stroke="#333"/>']
    for angle, _radius, max_t in rows:
        a0 = math.radians(angle - step / 2.0)
        a1 = math.radians(angle + step / 2.0)
        if max_t < 0:
            color = "#202020"
        else:
            frac = max(0.0, min(1.0, max_t / horizon))
            color = f"#{int(40 + 30 * (1 - frac)):02x}{int(60 + 180 * frac):02x}{int(200 - 120 * frac):02x}"
        pts = []
        for rr, aa in ((r_in, a0), (r_out, a0), (r_out, a1), (r_in, a1)):
            pts.append(f"{_fmt(cx + rr * math.cos(aa))},{_fmt(cy - rr * math.sin(aa))}")
        out.append(f'<polygon points="{" ".join(pts)}" fill="{color}" stroke="none">'
                   f'<title>{angle:g} deg: '
                   f'{"never" if max_t < 0 else f"{max_t:g} s"}</title></polygon>')
        lx = cx + (r_out + 22) * math.cos(math.radians(angle))
        ly = cy - (r_out + 22) * math.sin(math.radians(angle))
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" text-anchor="middle" font-size="11">'
                   f'{angle:g}</text>')
    out.append(f'<text x="{cx:g}" y="{H - 14:g}" text-anchor="middle" font-size="13">'
               'largest safe abort deadline per bearing (dark = never)</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# command line


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rdvsafe",
        description="Reachability-based safety verification of a two-phase "
                    "spacecraft rendezvous with passive aborts.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="compute the flowpipe and decide every property")
    v.add_argument("scenario")
    v.add_argument("--out", default="out", help="output directory (default: out)")
    v.add_argument("--window", type=float, default=None,
                   help="split the abort window into subwindows of this width (s)")

    s = sub.add_parser("simulate", help="export sampled closed-loop trajectories")
    s.add_argument("scenario")
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--out", default="out")

    f = sub.add_parser("falsify", help="search for a concrete counterexample")
    f.add_argument("scenario")
    f.add_argument("--samples", type=int, required=True)
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--out", default="out")

    w = sub.add_parser("sweep", help="largest safe abort deadline over initial bearings")
    w.add_argument("scenario")
    w.add_argument("--angles", default="0:360:5", help="grid as start:stop:step degrees")
    w.add_argument("--radius", type=float, default=950.0)
    w.add_argument("--jobs", type=int, default=max(1, os.cpu_count() or 1))
    w.add_argument("--out", default="out")

    pl = sub.add_parser("plot", help="render a reach-set plane from a report")
    pl.add_argument("report")
    pl.add_argument("--plane", required=True, choices=sorted(_PLANES))
    pl.add_argument("--out", default=None, help="output SVG path")
    return p


def _cmd_verify(args) -> int:
    sc = load_scenario(args.scenario)
    report = verify_windowed(sc, args.window) if args.window is not None else verify(sc)
    os.makedirs(args.out, exist_ok=True)
    emit_flowpipe(report, os.path.join(args.out, "flowpipe.csv"))
    emit_report(report, os.path.join(args.out, "report.json"), flowpipe_csv="flowpipe.csv")
    print(f"verdict: {report.verdict}"
          + (f" ({report.reason})" if report.reason else "")
          + f" | pipes: {len(report.segments)} | steps: {report.steps_total}"
          + f" | wall: {report.wall_time_s:.2f}s")
    for v in report.violations:
        print(f"  {v.property}: first possible hit at t={v.time_s:g}s in {v.mode}"
              " (over-approximation witness; confirm via falsify)")
    return {"safe": 0, "unsafe": 1, "inconclusive": 3}[report.verdict]


def _cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    if args.samples < 1:
        print("need at least one sample", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    pts = sample_initial_points(Box(lo=sc.init.lo[:4], hi=sc.init.hi[:4]), args.samples)
    rng = np.random.default_rng(sc.seed)
    k1 = int(math.ceil(sc.t1 / sc.h))
    k2 = max(k1, int(math.floor(sc.t2 / sc.h)))
    psteps = rng.integers(k1, k2 + 1, size=args.samples)
    for i, (x0, pk) in enumerate(zip(pts, psteps)):
        traj = simulate_scenario(sc, x0, int(pk))
        out = os.path.join(args.out, f"trajectory_{i:03d}.csv")
        traj.to_csv(out)
        print(f"sample {i}: abort at t={pk * sc.h:g}s -> {out}")
    return 0


def _cmd_falsify(args) -> int:
    sc = load_scenario(args.scenario)
    traj = falsify(sc, args.samples, seed=args.seed)
    if traj is None:
        print(f"no counterexample in {args.samples} samples")
        return 0
    os.makedirs(args.out, exist_ok=True)
    out = os.path.join(args.out, "counterexample.csv")
    traj.to_csv(out)
    name, step = traj.violation
    print(f"counterexample: {name} violated at t={traj.times[step]:g}s -> {out}")
    return 1


def _cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    try:
        a, b, step = (float(x) for x in args.angles.split(":"))
    except ValueError:
        print(f"cannot parse --angles {args.angles!r}; expected start:stop:step",
              file=sys.stderr)
        return 2
    angles = list(np.arange(a, b, step))
    rows = sweep_passive_time(sc, angles, args.radius, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    _emit_sweep_csv(rows, os.path.join(args.out, "sweep.csv"))
    _emit_sweep_svg(rows, sc.horizon, os.path.join(args.out, "sweep.svg"))
    for angle, radius, max_t in rows:
        print(f"angle {angle:7.2f} deg radius {radius:g} m -> "
              + ("never" if max_t < 0 else f"safe through T={max_t:g}s"))
    return 0


def _cmd_plot(args) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    sc = scenario_from_dict(doc["config"])
    csv_name = doc.get("flowpipe_csv")
    if not csv_name:
        print("report carries no flowpipe reference; nothing to plot", file=sys.stderr)
        return 2
    csv_path = os.path.join(os.path.dirname(os.path.abspath(args.report)), csv_name)
    segments = load_flowpipe_csv(csv_path)
    out = args.out or os.path.join(os.path.dirname(os.path.abspath(args.report)),
                                   f"plot_{args.plane}.svg")
    emit_plot_segments(segments, sc, args.plane, out)
    print(f"wrote {out}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "falsify":
            return _cmd_falsify(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "plot":
            return _cmd_plot(args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
