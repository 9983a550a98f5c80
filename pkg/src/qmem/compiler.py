"""Compile unitaries into planar rotations on coupling-graph edges.

A planar rotation on a level pair (a, b) is

    R(theta, phi) = exp[(theta/2) (e^{i phi} |a><b| - e^{-i phi} |b><a|)],

the identity outside span{a, b}. These are the only primitives the hardware
graph offers, one per addressable transition. This module provides:

* `rotation_matrix` / `sequence_product`: exact matrix forms and products.
* `memory_sequence` / `reverse_sequence`: the five-pulse schedule that
  stores an optical-transition state in the ground pair, and its inverse.
* `decompose`: Givens-style elimination of an arbitrary target unitary into
  edge rotations, routing through graph paths when a required level pair is
  not directly coupled.

Ordering conventions, fixed and tested:

* A rotation list is in matrix order: `sequence_product([R1, R2, ...])`
  is R1 @ R2 @ ..., the leftmost factor acting last on states.
* A `PulseSchedule` is in time order: the first pulse acts first, so a
  schedule (p1, ..., pk) realizes R(pk) ... R(p1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ScheduleError, SystemModelError
from .pulses import Pulse, PulseEnvelope, PulseSchedule, calibrate_amplitude, ideal_rotation
from .pulses import _GAUSS_UNIT_AREA
from .states import UnitaryOperator
from .system import LevelSystem, addressable_edges

ZERO_TOL = 1e-14
SCALAR_TOL = 1e-10

# planar-rotation identities used throughout (verified in the test suite):
#   adjoint:      R(theta, phi)^dag            = R(theta, phi + pi)
#   orientation:  R on (b, a) with phase phi   = R on (a, b) with phase pi - phi
#   path step:    X^dag R_{b,c}(theta, phi) X  = R_{a,c}(theta, phi + pi),
#                 X = R_{a,b}(pi, 0)

MEMORY_EDGE_ORDER = (("g2", "e2"), ("g1", "e2"), ("g1", "e1"), ("g1", "e2"), ("g2", "e2"))


@dataclass(frozen=True)
class PlanarRotation:
    """A two-level rotation on one edge: angle theta, phase phi (radians)."""

    edge: tuple[str, str]
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "edge", tuple(self.edge))
        if len(self.edge) != 2 or self.edge[0] == self.edge[1]:
            raise ScheduleError(f"edge must be a pair of distinct levels, got {self.edge}")

    def inverse(self) -> "PlanarRotation":
        return PlanarRotation(self.edge, self.theta, self.phi + math.pi)


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """Factorization target = product(rotations) @ remainder.

    `remainder` is diagonal whenever the coupling graph reached every level
    the target acts on; its diagonal is exposed as `residual_diagonal`.
    `exact` is True iff the remainder is a scalar (identity up to a global
    phase). `unreachable` names levels the graph could not route to.
    """

    rotations: tuple[PlanarRotation, ...]
    remainder: np.ndarray
    exact: bool
    unreachable: tuple[str, ...] = ()

    @property
    def residual_diagonal(self) -> np.ndarray:
        return np.diag(self.remainder).copy()


def _rotation_array(a: int, b: int, theta: float, phi: float, dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    out[a, a] = c
    out[b, b] = c
    out[a, b] = s * np.exp(1j * phi)
    out[b, a] = -s * np.exp(-1j * phi)
    return out


def rotation_matrix(rotation: PlanarRotation, levels) -> UnitaryOperator:
    """Matrix form of a planar rotation in the basis given by `levels`."""
    labels = list(levels)
    try:
        a = labels.index(rotation.edge[0])
        b = labels.index(rotation.edge[1])
    except ValueError as exc:
        raise SystemModelError(f"rotation edge {rotation.edge} not in basis {labels}") from exc
    return UnitaryOperator(_rotation_array(a, b, rotation.theta, rotation.phi, len(labels)))


def sequence_product(rotations, levels) -> UnitaryOperator:
    """Left-to-right product R1 @ R2 @ ... (leftmost factor acts last on states)."""
    labels = list(levels)
    out = np.eye(len(labels), dtype=complex)
    for r in rotations:
        out = out @ rotation_matrix(r, labels).entries
    return UnitaryOperator(out)


def ground_storage_unitary(system: LevelSystem) -> UnitaryOperator:
    """The storage map: optical-pair populations and coherence onto the ground pair.

    Sends rho with support on (g1, e1) to rho' with rho'_{g1 g1} = rho_{g1 g1},
    rho'_{g2 g2} = rho_{e1 e1} and rho'_{g1 g2} = rho_{g1 e1}; identity on any
    additional levels beyond the standard four.
    """
    n = system.dim
    g1, g2, e1, e2 = (system.index(l) for l in ("g1", "g2", "e1", "e2"))
    mat = np.eye(n, dtype=complex)
    mat[g1, g1] = -1.0
    mat[e2, e2] = -1.0
    mat[g2, g2] = 0.0
    mat[e1, e1] = 0.0
    mat[g2, e1] = -1.0
    mat[e1, g2] = 1.0
    return UnitaryOperator(mat)


def memory_sequence(
    system: LevelSystem,
    shape: str = "gaussian",
    width: float | None = None,
    gap: float = 0.0,
    start: float = 0.0,
) -> PulseSchedule:
    """The five-pulse storage schedule, in time order.

    Pulses drive g2-e2, g1-e2, g1-e1, g1-e2, g2-e2 with areas pi/(2 d_edge)
    and carrier phase pi/2 each, laid out back to back (plus `gap`). The
    default width makes every pulse's peak Rabi frequency equal 1, which
    fixes the package time unit to the g1-e1 pulse's inverse peak Rabi
    frequency. The ideal product of the schedule is `ground_storage_unitary`.
    """
    if width is None:
        width = math.pi / _GAUSS_UNIT_AREA if shape == "gaussian" else math.pi
    if width <= 0:
        raise ScheduleError(f"pulse width must be > 0, got {width}")
    if gap < 0:
        raise ScheduleError(f"gap must be >= 0, got {gap}")
    pulses = []
    t = start
    for a, b in MEMORY_EDGE_ORDER:
        if not system.has_transition(a, b) or not system.transition(a, b).addressable:
            raise SystemModelError(f"system is missing addressable edge {a}-{b}")
        d = system.dipole(a, b)
        area = math.pi / (2.0 * d)
        if shape == "gaussian":
            env = PulseEnvelope.gaussian(1.0, center=t + 4.0 * width, sigma=width)
        else:
            env = PulseEnvelope.square(1.0, start=t, duration=width)
        env = env.with_amplitude(calibrate_amplitude(area, env))
        pulses.append(Pulse(env, (a, b), carrier_phase=math.pi / 2.0))
        t = env.t_end + gap
    return PulseSchedule(tuple(pulses))


def reverse_sequence(schedule: PulseSchedule, start: float | None = None) -> PulseSchedule:
    """Invert a schedule: pulses mirrored in time, each carrier phase shifted by pi.

    The ideal product of the result is the adjoint of the forward product.
    If `start` is given the reversed schedule is shifted to begin there.
    """
    if not schedule.pulses:
        return PulseSchedule(())
    t0, t1 = schedule.t_start, schedule.t_end
    pulses = []
    for p in reversed(schedule.pulses):
        env = p.envelope
        if env.shape == "gaussian":
            mirrored = PulseEnvelope.gaussian(env.amplitude, t0 + t1 - env.center, env.sigma)
        else:
            mirrored = PulseEnvelope.square(env.amplitude, t0 + t1 - env.t_end, env.duration)
        pulses.append(Pulse(mirrored, p.transition, p.carrier_phase + math.pi))
    out = PulseSchedule(tuple(pulses))
    if start is not None:
        shift = start - out.t_start
        out = PulseSchedule(tuple(Pulse(p.envelope.shifted(shift), p.transition, p.carrier_phase) for p in out))
    return out


def schedule_rotations(system: LevelSystem, schedule: PulseSchedule) -> list[PlanarRotation]:
    """Ideal rotation of each pulse, in time order."""
    schedule.bind_check(system)
    return [ideal_rotation(p, system.dipole(*p.transition)) for p in schedule]


def schedule_unitary(system: LevelSystem, schedule: PulseSchedule) -> UnitaryOperator:
    """The total unitary a schedule realizes in the impulse limit.

    Time order maps to matrix order by reversal: the last pulse is the
    leftmost factor.
    """
    return sequence_product(list(reversed(schedule_rotations(system, schedule))), system.labels)


def _lex_shortest_path(adjacency: dict[int, list[int]], src: int, dst: int) -> list[int] | None:
    """Lexicographically smallest shortest path src -> dst, or None."""
    if src == dst:
        return [src]
    dist = {dst: 0}
    frontier = [dst]
    while frontier:
        nxt = []
        for node in frontier:
            for nb in adjacency.get(node, ()):
                if nb not in dist:
                    dist[nb] = dist[node] + 1
                    nxt.append(nb)
        frontier = nxt
    if src not in dist:
        return None
    path = [src]
    node = src
    while node != dst:
        node = min(nb for nb in adjacency[node] if dist.get(nb, -1) == dist[node] - 1)
        path.append(node)
    return path


def _expand_virtual_rotation(path: list[int], theta: float, phi: float) -> list[tuple[int, int, float, float]]:
    """Edge-rotation factors (matrix order) realizing a rotation on (path[0], path[-1]).

    A rotation on a non-adjacent pair (a, c) routed a-b-...-c becomes
    X^dag R' X with X the pi rotation on (a, b) and R' the rotation on
    (b, ..., c) with phase shifted by -pi.
    """
    if len(path) == 2:
        return [(path[0], path[1], theta, phi)]
    a, b = path[0], path[1]
    inner = _expand_virtual_rotation(path[1:], theta, phi - math.pi)
    return [(a, b, math.pi, math.pi)] + inner + [(a, b, math.pi, 0.0)]


def _canonical_rotation(a: int, b: int, theta: float, phi: float, labels) -> PlanarRotation:
    """Emit with the lower-index level first; swapping the pair flips phi to pi - phi."""
    if a > b:
        a, b, phi = b, a, math.pi - phi
    return PlanarRotation((labels[a], labels[b]), theta, phi)


def decompose(
    target,
    levels,
    edges,
    synthesize_phases: bool = False,
) -> DecompositionResult:
    """Factor a target unitary into planar rotations on the given edges.

    Givens-style elimination: below-diagonal entries are zeroed column by
    column (left to right), rows bottom to top, each elimination mixing row
    r with the diagonal row c through a rotation on the level pair (c, r).
    When (c, r) is not an edge the rotation is synthesized by conjugation
    along the lexicographically smallest shortest graph path. Entries with
    magnitude <= 1e-14 are treated as zero.

    The returned factors satisfy target = product(rotations) @ remainder
    with a diagonal remainder (reported, not synthesized away). With
    `synthesize_phases=True` the residual phases are additionally realized
    as pairs of pi rotations with offset phases on spanning-tree edges,
    leaving a scalar remainder and `exact=True`.

    If the graph does not connect every level the target acts on, the
    result is partial: `exact=False` and `unreachable` names the levels
    that could not be routed.
    """
    if isinstance(target, UnitaryOperator):
        work = target.entries.copy()
    else:
        work = UnitaryOperator(np.array(target, dtype=complex)).entries.copy()
    labels = list(levels)
    n = len(labels)
    if work.shape != (n, n):
        raise SystemModelError(f"target shape {work.shape} does not match {n} levels")
    index = {lab: i for i, lab in enumerate(labels)}
    adjacency: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        if a not in index or b not in index:
            raise SystemModelError(f"edge ({a}, {b}) references a level outside the basis")
        ia, ib = index[a], index[b]
        adjacency[ia].append(ib)
        adjacency[ib].append(ia)
    for nbs in adjacency.values():
        nbs.sort()

    factors: list[tuple[int, int, float, float]] = []  # matrix order, role pairs
    unreachable: set[str] = set()
    for c in range(n - 1):
        for r in range(n - 1, c, -1):
            y = work[r, c]
            if abs(y) <= ZERO_TOL:
                continue
            path = _lex_shortest_path(adjacency, c, r)
            if path is None:
                unreachable.update((labels[c], labels[r]))
                continue
            x = work[c, c]
            if abs(x) <= ZERO_TOL:
                theta, phi = math.pi, 0.0
            else:
                theta = 2.0 * math.atan2(abs(y), abs(x))
                phi = float(np.angle(x) - np.angle(y))
            # apply the virtual rotation G on rows (c, r) of the working copy
            cth = math.cos(theta / 2.0)
            sth = math.sin(theta / 2.0)
            row_c = work[c, :].copy()
            row_r = work[r, :].copy()
            work[c, :] = cth * row_c + sth * np.exp(1j * phi) * row_r
            work[r, :] = -sth * np.exp(-1j * phi) * row_c + cth * row_r
            # emitted factor is G^dag, expanded along the path
            factors.extend(_expand_virtual_rotation(path, theta, phi + math.pi))

    remainder = work
    exact = _is_scalar(remainder)

    if synthesize_phases and not unreachable and not exact and _is_diagonal(remainder):
        phase_factors, scalar = _synthesize_diagonal(remainder, adjacency)
        if phase_factors is not None:
            factors.extend(phase_factors)
            remainder = scalar * np.eye(n, dtype=complex)
            exact = True

    rotations = tuple(_canonical_rotation(a, b, th, ph, labels) for a, b, th, ph in factors)
    return DecompositionResult(
        rotations=rotations,
        remainder=remainder,
        exact=exact,
        unreachable=tuple(sorted(unreachable)),
    )


def _is_diagonal(mat: np.ndarray, tol: float = SCALAR_TOL) -> bool:
    off = mat - np.diag(np.diag(mat))
    return bool(np.abs(off).max() <= tol)


def _is_scalar(mat: np.ndarray, tol: float = SCALAR_TOL) -> bool:
    if not _is_diagonal(mat, tol):
        return False
    diag = np.diag(mat)
    return bool(np.abs(diag - diag[0]).max() <= tol)


def _synthesize_diagonal(remainder: np.ndarray, adjacency: dict[int, list[int]]):
    """Pair-of-pi-rotation factors realizing remainder up to a global phase.

    Two pi rotations with phases (gamma - pi, 0) on an edge (a, b) multiply
    to diag(e^{i gamma}, e^{-i gamma}) on that pair. Relative phases are
    pushed leaf-to-root along a BFS spanning tree; requires a connected
    graph (returns (None, None) otherwise).
    """
    n = remainder.shape[0]
    parent = {0: None}
    order = [0]
    for node in order:
        for nb in adjacency.get(node, ()):
            if nb not in parent:
                parent[nb] = node
                order.append(nb)
    if len(order) < n:
        return None, None
    delta = np.angle(np.diag(remainder))
    alpha = float(delta.mean())
    need = delta - alpha
    factors: list[tuple[int, int, float, float]] = []
    for v in reversed(order[1:]):
        gamma = need[v]
        if abs(gamma) > 1e-15:
            u = parent[v]
            factors.append((v, u, math.pi, gamma - math.pi))
            factors.append((v, u, math.pi, 0.0))
            need[u] += gamma
    return factors, np.exp(1j * alpha)


def decompose_on_system(target, system: LevelSystem, synthesize_phases: bool = False) -> DecompositionResult:
    """`decompose` against a system's basis order and addressable edges."""
    return decompose(target, system.labels, addressable_edges(system), synthesize_phases=synthesize_phases)
