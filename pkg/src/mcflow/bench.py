"""Benchmark initial conditions and interface/topology diagnostics.

Initial conditions cover the benchmark family: a single circle, two circles
separated by a gap, two wedges joined by a thin neck, a seeded random field
(optionally pre-smoothed by a few implicit phase-field steps), and a uniform
state.  Geometric kinds carry a signed distance that is positive inside the
tracked phase; the profile selector turns it into either the raw signed
distance (for the level-set solver) or the tanh transition profile (for the
phase-field solvers).

Diagnostics: the measured radius of a circular interface, the number of
4-connected components of the positive phase, and the merge/split/vanish
event timeline derived from component counts over time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .discretization import Field, GridSpec
from .errors import VanishedInterfaceError

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)


# -- initial conditions --------------------------------------------------------

@dataclass(frozen=True)
class Tanh:
    """Transition profile tanh(d / (sqrt(2) eps)) of width eps."""
    eps: float

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError(f"profile eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class SignedDistance:
    """Keep the raw signed distance (level-set initialization)."""


@dataclass(frozen=True)
class Circle:
    center: tuple = (0.0, 0.0)
    radius: float = 0.2

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class TwoCircles:
    """Two circles of equal radius on the x-axis, boundary gap ``gap``."""
    gap: float = 0.02
    radius: float = 0.14

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.gap < 0.0:
            raise ValueError(f"gap must be nonnegative, got {self.gap}")


@dataclass(frozen=True)
class Wedges:
    """Two wedges carved from a disk, joined by a neck of width ~``neck``.

    A disk of radius 1/3 sits at the origin; two balls of radius
    2/3 - neck/2 centered at (0, +-2/3) carve away its upper and lower
    parts, leaving two side wedges connected through a thin neck at the
    origin.  The tanh profile width equals ``neck``.
    """
    neck: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.neck < 1.0 / 3.0:
            raise ValueError(f"neck must lie in (0, 1/3), got {self.neck}")


@dataclass(frozen=True)
class RandomField:
    """I.i.d. uniform nodal values in [-0.9, 0.9], optionally pre-smoothed
    by ``presmooth_steps`` fully implicit phase-field steps."""
    seed: int
    presmooth_steps: int = 50
    presmooth_k: float = 1e-5
    presmooth_eps: float = 0.01

    def __post_init__(self):
        if self.presmooth_steps < 0:
            raise ValueError("presmooth_steps must be nonnegative")
        if self.presmooth_k <= 0.0 or self.presmooth_eps <= 0.0:
            raise ValueError("presmooth_k and presmooth_eps must be positive")


@dataclass(frozen=True)
class Uniform:
    value: float


@dataclass(frozen=True)
class InitialCondition:
    kind: object
    profile: object = field(default_factory=SignedDistance)


def _check_inside(grid: GridSpec, x_lo, x_hi, y_lo, y_hi, what):
    if (x_lo <= grid.x_min or x_hi >= grid.x_max
            or y_lo <= grid.y_min or y_hi >= grid.y_max):
        raise ValueError(f"{what} does not fit strictly inside the domain box")


def _signed_distance(kind, grid: GridSpec):
    """Signed distance of the geometric kinds, positive inside the phase."""
    X, Y = grid.coords()
    if isinstance(kind, Circle):
        cx, cy = kind.center
        _check_inside(grid, cx - kind.radius, cx + kind.radius,
                      cy - kind.radius, cy + kind.radius, "circle")
        return kind.radius - np.hypot(X - cx, Y - cy)
    if isinstance(kind, TwoCircles):
        off = kind.radius + 0.5 * kind.gap
        _check_inside(grid, -off - kind.radius, off + kind.radius,
                      -kind.radius, kind.radius, "two circles")
        d1 = kind.radius - np.hypot(X + off, Y)
        d2 = kind.radius - np.hypot(X - off, Y)
        return np.maximum(d1, d2)
    if isinstance(kind, Wedges):
        m = kind.neck
        r_disk = 1.0 / 3.0
        r_carve = 2.0 / 3.0 - 0.5 * m
        _check_inside(grid, -r_disk, r_disk, -r_disk, r_disk, "wedges")
        d1 = np.hypot(X, Y - 2.0 / 3.0) - r_carve
        d2 = np.hypot(X, Y) - r_disk
        d3 = np.hypot(X, Y + 2.0 / 3.0) - r_carve
        # positive outside the kept region; negate to make inside positive
        return -np.maximum(np.maximum(-d1, d2), -d3)
    raise TypeError(f"kind {kind!r} has no signed-distance geometry")


def make_initial_condition(ic: InitialCondition, grid: GridSpec) -> Field:
    """Realize an initial condition as a nodal field on the grid."""
    kind = ic.kind
    if isinstance(kind, Uniform):
        return Field.constant(grid, kind.value)
    if isinstance(kind, RandomField):
        rng = np.random.default_rng(kind.seed)
        values = rng.uniform(-0.9, 0.9, size=(grid.npts, grid.npts))
        u = Field(grid, values)
        if kind.presmooth_steps > 0:
            from .energy import StepParams
            from .schemes import NewtonConfig, SchemeId, step_scheme
            p = StepParams(eps=kind.presmooth_eps, k=kind.presmooth_k)
            cfg = NewtonConfig()
            for _ in range(kind.presmooth_steps):
                u = step_scheme(SchemeId.FIS, u, p, cfg)
        return u
    d = _signed_distance(kind, grid)
    profile = ic.profile
    if isinstance(kind, Wedges):
        # the wedge construction fixes its own transition width
        if isinstance(profile, Tanh):
            d = np.tanh(d / (np.sqrt(2.0) * kind.neck))
        return Field(grid, d)
    if isinstance(profile, Tanh):
        return Field(grid, np.tanh(d / (np.sqrt(2.0) * profile.eps)))
    if isinstance(profile, SignedDistance):
        return Field(grid, d)
    raise TypeError(f"unknown profile {profile!r}")


# -- diagnostics ----------------------------------------------------------------

def measure_radius(u: Field) -> float:
    """Distance from the centroid of the positive phase to the zero crossing
    along the +x direction (linear interpolation between nodes)."""
    v = u.values
    pos = v > 0.0
    if not pos.any():
        raise VanishedInterfaceError("no positive phase: interface has vanished")
    X, Y = u.grid.coords()
    cx = float(X[pos].mean())
    cy = float(Y[pos].mean())
    grid = u.grid
    j = int(round((cy - grid.y_min) / grid.h))
    j = min(max(j, 0), grid.n)
    i = int(round((cx - grid.x_min) / grid.h))
    i = min(max(i, 0), grid.n)
    row = v[:, j]
    xs = grid.xs
    while i < grid.n:
        if row[i] > 0.0 and row[i + 1] <= 0.0:
            frac = row[i] / (row[i] - row[i + 1])
            return xs[i] + frac * grid.h - cx
        i += 1
    raise VanishedInterfaceError(
        "no sign change along the +x ray from the centroid")


def count_components(u: Field, threshold: float = 0.0) -> int:
    """Number of 4-connected components of {u > threshold}."""
    mask = u.values > threshold
    _, num = ndimage.label(mask, structure=FOUR_CONNECTED)
    return int(num)


class TopologyEvent(enum.Enum):
    MERGE = "merge"
    SPLIT = "split"
    VANISH = "vanish"


@dataclass(frozen=True)
class TopologyTimeline:
    """Component counts over time plus the derived topology-change events."""

    times: tuple
    component_counts: tuple
    events: tuple  # of (time, TopologyEvent)

    def __post_init__(self):
        if len(self.times) != len(self.component_counts):
            raise ValueError("times and counts must have equal length")


def classify_topology(times, counts) -> TopologyTimeline:
    """Derive merge/split/vanish events from a component-count sequence.

    A decrease to a positive count is a merge, any increase is a split, and
    reaching zero is the (terminal) vanish event.
    """
    times = tuple(float(t) for t in times)
    counts = tuple(int(c) for c in counts)
    if len(times) != len(counts):
        raise ValueError("times and counts must have equal length")
    events = []
    for i in range(1, len(counts)):
        prev, cur = counts[i - 1], counts[i]
        if cur == prev:
            continue
        if cur == 0:
            events.append((times[i], TopologyEvent.VANISH))
            break
        if cur < prev:
            events.append((times[i], TopologyEvent.MERGE))
        else:
            events.append((times[i], TopologyEvent.SPLIT))
    return TopologyTimeline(times, counts, tuple(events))


def final_classification(timeline: TopologyTimeline,
                         ended_uniform: bool = False) -> str:
    """Overall outcome of a run: "merge", "separate" or "vanish".

    Components that coalesce (and stay coalesced) merged; components that
    stay apart until they shrink away, or that split without re-merging,
    separated.  A run whose interface is gone without any topology event
    vanished.
    """
    kinds = [e for _, e in timeline.events]
    merge_last = max((i for i, e in enumerate(kinds)
                      if e is TopologyEvent.MERGE), default=-1)
    split_last = max((i for i, e in enumerate(kinds)
                      if e is TopologyEvent.SPLIT), default=-1)
    vanished = TopologyEvent.VANISH in kinds or (
        len(timeline.component_counts) > 0 and timeline.component_counts[-1] == 0)
    if merge_last >= 0 and merge_last > split_last:
        return "merge"
    if split_last >= 0:
        return "separate"
    if timeline.component_counts and timeline.component_counts[0] >= 2:
        return "separate"
    if vanished or ended_uniform:
        return "vanish"
    return "merge"
