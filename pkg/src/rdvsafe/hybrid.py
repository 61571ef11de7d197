"""Hybrid automaton of the two-phase rendezvous mission, plus its safety sets.

Three modes: far-range approach (prox_a, separation 100..1000 m), close-range
approach (prox_b, separation below 100 m), and a passive thruster-off coast
entered nondeterministically in a clock window [t1, t2] to model failures.
The prox_a/prox_b switching guard is the 100 m octagon and is urgent; the
octagon under-approximates the separation circle so the linear guard never
fires later than the circular one along the axes.

Safety requirements are registered as linear unsafe sets per mode: a
line-of-sight cone and a velocity polytope in prox_b, thrust limits in both
rendezvous modes (thrust-tracking variants only), and a collision box around
the target in the passive mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lqr import GainMatrix
from .numsim import MODE_PASSIVE, MODE_PROX_A, MODE_PROX_B
from .orbital import OrbitalParams, closed_loop_matrix, cwh_matrices
from .starset import Box

VARIANT_LIN = "lin_prox"
VARIANT_TRACKING = "lin_prox_th_tracking"
VARIANT_EXPLICIT = "lin_prox_th_explicit"
VARIANT_NONLINEAR = "nlin_prox"
VARIANTS = (VARIANT_LIN, VARIANT_TRACKING, VARIANT_EXPLICIT, VARIANT_NONLINEAR)

GUARD_RADIUS_M = 100.0
LOS_BASE_X_M = -100.0
LOS_HALF_ANGLE_DEG = 30.0
VELOCITY_LIMIT_MPS = 0.05
THRUST_LIMIT_N = 10.0
SEPARATION_HALFWIDTH_M = 0.1 / math.sqrt(2.0)  # box of 0.1 m circumradius


@dataclass(frozen=True)
class SafetyProperty:
    """One registered check.

    Half-space form: violation when the reach set meets ``normal . x >= offset``
    (strictly when ``strict``, i.e. the complement of a closed safe region).
    Conjunction form: violation when the reach box over ``box_dims`` overlaps
    ``unsafe_box``.
    """

    name: str
    modes: tuple[str, ...]
    normal: np.ndarray | None = None
    offset: float | None = None
    strict: bool = False
    unsafe_box: Box | None = None
    box_dims: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.normal is not None:
            object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))


@dataclass(frozen=True)
class Guard:
    """Transition guard: spatial half-spaces, or a clock window, never both."""

    halfspaces: tuple = ()
    region_inside: bool = True  # guard region is the conjunction, else its complement
    urgent: bool = False
    clock_window: tuple[float, float] | None = None

    def __post_init__(self):
        if self.urgent and self.clock_window is not None:
            raise ValueError("urgent guards carry no clock window")
        if self.clock_window is not None and self.halfspaces:
            raise ValueError("timed guards carry no spatial constraint")


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    guard: Guard


@dataclass(frozen=True)
class Mode:
    """Mode with its flow matrix and the convex part of its invariant.

    ``invariant`` lists (a, b) half-spaces a.x <= b used to tighten sets that
    restart in this mode; the far-range mode's spatial invariant (outside the
    octagon) is not convex and is left empty here.
    """

    name: str
    flow: np.ndarray
    invariant: tuple = ()
    clock_max: float | None = None
    clock_min: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "flow", np.asarray(self.flow, dtype=float))


@dataclass(frozen=True)
class HybridAutomaton:
    variant: str
    dim: int
    params: OrbitalParams
    gains: tuple[GainMatrix, GainMatrix]
    modes: dict[str, Mode]
    transitions: tuple[Transition, ...]
    guard_normals: np.ndarray     # octagon half-spaces embedded at self.dim
    guard_offsets: np.ndarray
    properties: tuple[SafetyProperty, ...]
    t1: float
    t2: float


def octagon_halfspaces(radius: float):
    """Regular octagon inscribed in the circle of ``radius``, vertices on the axes.

    Returns (normals, offsets) with rows cos(22.5 + 45 k), sin(22.5 + 45 k)
    and offsets radius * cos(22.5 deg), k = 0..7, meaning a.x <= b inside.
    """
    if not (radius > 0.0):
        raise ValueError("octagon radius must be positive")
    ang = np.deg2rad(22.5 + 45.0 * np.arange(8))
    normals = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    offsets = np.full(8, radius * math.cos(math.radians(22.5)))
    return normals, offsets


def los_halfspaces(base_x: float = LOS_BASE_X_M, half_angle_deg: float = LOS_HALF_ANGLE_DEG):
    """Triangular line-of-sight region as (a, b) half-spaces, a.x <= b safe.

    The cone opens about the -x axis with the given half angle; the base edge
    closes it at ``base_x``, the close-range mode boundary.
    """
    t = math.tan(math.radians(half_angle_deg))
    return (
        (np.array([-1.0, 0.0]), -base_x),   # x >= base_x
        (np.array([t, 1.0]), 0.0),          # y <= -x tan
        (np.array([t, -1.0]), 0.0),         # y >= x tan
    )


def velocity_polytope(limit: float = VELOCITY_LIMIT_MPS):
    """Octagonal under-approximation of the speed disc |v| <= limit.

    Returns (normals, offsets) with edge normals on the axes and diagonals
    (k * 45 deg) and offsets limit * cos(22.5 deg); membership implies the
    true circular bound, so safe verdicts stay sound for it.
    """
    ang = np.deg2rad(45.0 * np.arange(8))
    normals = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    offsets = np.full(8, limit * math.cos(math.radians(22.5)))
    return normals, offsets


def _embed(vec2: np.ndarray, dims: tuple[int, int], dim: int) -> np.ndarray:
    out = np.zeros(dim)
    out[dims[0]] = vec2[0]
    out[dims[1]] = vec2[1]
    return out


def thrust_properties(variant: str, limit: float = THRUST_LIMIT_N) -> tuple[SafetyProperty, ...]:
    """Four unsafe half-spaces |u_x|, |u_y| >= limit (Newtons) on the thrust states."""
    if variant not in (VARIANT_TRACKING, VARIANT_EXPLICIT):
        raise ValueError(f"variant {variant!r} has no thrust states to constrain")
    scope = (MODE_PROX_A, MODE_PROX_B)
    props = []
    for name, axis, sign in (
        ("thrust_x_hi", 4, 1.0),
        ("thrust_x_lo", 4, -1.0),
        ("thrust_y_hi", 5, 1.0),
        ("thrust_y_lo", 5, -1.0),
    ):
        normal = np.zeros(6)
        normal[axis] = sign
        props.append(SafetyProperty(name=name, modes=scope, normal=normal, offset=limit))
    return tuple(props)


def separation_property(halfwidth: float = SEPARATION_HALFWIDTH_M) -> SafetyProperty:
    """Collision box around the target, checked during the passive coast."""
    return SafetyProperty(
        name="separation",
        modes=(MODE_PASSIVE,),
        unsafe_box=Box(lo=np.array([-halfwidth, -halfwidth]), hi=np.array([halfwidth, halfwidth])),
        box_dims=(0, 1),
    )


def default_properties(variant: str, dim: int, overrides: dict | None = None):
    ov = dict(overrides or {})
    los_base = float(ov.pop("los_base_x_m", LOS_BASE_X_M))
    los_angle = float(ov.pop("los_half_angle_deg", LOS_HALF_ANGLE_DEG))
    vel_limit = float(ov.pop("velocity_limit_mps", VELOCITY_LIMIT_MPS))
    thrust_limit = float(ov.pop("thrust_limit_n", THRUST_LIMIT_N))
    sep_halfwidth = float(ov.pop("separation_halfwidth_m", SEPARATION_HALFWIDTH_M))
    ov.pop("intersample_bloat", None)  # consumed by the verifier
    if ov:
        raise ValueError(f"unknown property overrides: {sorted(ov)}")

    props: list[SafetyProperty] = []
    los_names = ("los_range", "los_cone_upper", "los_cone_lower")
    for name, (a, b) in zip(los_names, los_halfspaces(los_base, los_angle)):
        props.append(SafetyProperty(
            name=name, modes=(MODE_PROX_B,),
            normal=_embed(a, (0, 1), dim), offset=b, strict=True,
        ))
    vel_normals, vel_offsets = velocity_polytope(vel_limit)
    for k in range(8):
        props.append(SafetyProperty(
            name=f"velocity_{45 * k:03d}", modes=(MODE_PROX_B,),
            normal=_embed(vel_normals[k], (2, 3), dim), offset=float(vel_offsets[k]), strict=True,
        ))
    if variant in (VARIANT_TRACKING, VARIANT_EXPLICIT):
        props.extend(thrust_properties(variant, thrust_limit))
    props.append(separation_property(sep_halfwidth))
    return tuple(props)


def initial_thrust_box(K: GainMatrix, m_c: float, init: Box) -> Box:
    """Interval image of the commanded thrust F = -m_c K x over a 4-dim state box."""
    if init.dim != 4:
        raise ValueError("initial thrust box needs a 4-dim state box")
    Kf = m_c * np.asarray(K.K, dtype=float)
    center = -Kf @ init.mid()
    halfwidth = np.abs(Kf) @ init.halfwidth()
    return Box(lo=center - halfwidth, hi=center + halfwidth)


def build_rendezvous_automaton(
    params: OrbitalParams,
    gains: tuple[GainMatrix, GainMatrix],
    variant: str,
    t1: float,
    t2: float,
    property_overrides: dict | None = None,
) -> HybridAutomaton:
    """Assemble the mission automaton for one model variant.

    Variants: ``lin_prox`` is the 4-dim closed loop; ``lin_prox_th_tracking``
    adds thrust states u = -m_c K x that track the command without feeding
    back; ``lin_prox_th_explicit`` instead injects the thrust states into the
    position dynamics, which is trajectory-equivalent from consistent initial
    conditions but loses the state-thrust correlation for sets;
    ``nlin_prox`` keeps the linear flows as placeholders and is handled by
    simulation only.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if not (0.0 <= t1 <= t2):
        raise ValueError(f"need 0 <= t1 <= t2, got [{t1}, {t2}]")

    model = cwh_matrices(params)
    A4 = model.A
    k_a, k_b = gains
    kf_a = params.m_c * np.asarray(k_a.K, dtype=float)
    kf_b = params.m_c * np.asarray(k_b.K, dtype=float)
    acl_a = closed_loop_matrix(model, kf_a)
    acl_b = closed_loop_matrix(model, kf_b)

    if variant in (VARIANT_LIN, VARIANT_NONLINEAR):
        dim = 4
        flow_a, flow_b, flow_p = acl_a, acl_b, A4
    else:
        dim = 6
        zeros = np.zeros((4, 2))
        if variant == VARIANT_TRACKING:
            flow_a = np.block([[acl_a, zeros], [-kf_a @ acl_a, np.zeros((2, 2))]])
            flow_b = np.block([[acl_b, zeros], [-kf_b @ acl_b, np.zeros((2, 2))]])
        else:
            Bf = model.B
            flow_a = np.block([[A4, Bf], [-kf_a @ A4, -kf_a @ Bf]])
            flow_b = np.block([[A4, Bf], [-kf_b @ A4, -kf_b @ Bf]])
        flow_p = np.block([[A4, zeros], [np.zeros((2, 6))]])

    oct2_n, oct_b = octagon_halfspaces(GUARD_RADIUS_M)
    oct_n = np.stack([_embed(row, (0, 1), dim) for row in oct2_n])
    inside_hs = tuple((oct_n[k], float(oct_b[k])) for k in range(8))

    modes = {
        MODE_PROX_A: Mode(name=MODE_PROX_A, flow=flow_a, invariant=(), clock_max=t2),
        MODE_PROX_B: Mode(name=MODE_PROX_B, flow=flow_b, invariant=inside_hs, clock_max=t2),
        MODE_PASSIVE: Mode(name=MODE_PASSIVE, flow=flow_p, invariant=(), clock_min=t1),
    }
    timed = Guard(urgent=False, clock_window=(t1, t2))
    transitions = (
        Transition(MODE_PROX_A, MODE_PROX_B,
                   Guard(halfspaces=inside_hs, region_inside=True, urgent=True)),
        Transition(MODE_PROX_B, MODE_PROX_A,
                   Guard(halfspaces=inside_hs, region_inside=False, urgent=True)),
        Transition(MODE_PROX_A, MODE_PASSIVE, timed),
        Transition(MODE_PROX_B, MODE_PASSIVE, timed),
    )
    return HybridAutomaton(
        variant=variant,
        dim=dim,
        params=params,
        gains=gains,
        modes=modes,
        transitions=transitions,
        guard_normals=oct_n,
        guard_offsets=np.asarray(oct_b, dtype=float),
        properties=default_properties(variant, dim, property_overrides),
        t1=float(t1),
        t2=float(t2),
    )
