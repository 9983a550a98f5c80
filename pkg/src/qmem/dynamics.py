"""Time-domain propagation in the resonant rotating frame.

Every pulse is exactly on resonance with its transition, so the multi-
rotating-frame drive Hamiltonian has no carrier terms:

    H(t) = sum_k (Omega_k(t)/2) (e^{i phi_k}|a_k><b_k| + e^{-i phi_k}|b_k><a_k|)

with Omega_k(t) = 2 d_k A_k(t) and at most one pulse active at a time.
Populations and the ground-pair coherence are frame-independent (the
ground levels are degenerate); optical coherences are reported in the
rotating frame.

Two propagators:

* `propagate_unitary`: piecewise midpoint-exponential (2nd-order Magnus)
  stepping of drho/dt = -i[H, rho], step min(sigma, T)/200 per pulse. Each
  step is an exact two-level conjugation, so trace and positivity are
  preserved to roundoff.
* `propagate_lindblad`: classical fixed-step 4th-order integration of the
  master equation with decay channels L_c = |ground><excited|, step
  h <= min(0.01/max Omega, 0.01/max Gamma).

Time is measured in units of the reference Rabi frequency (the default
schedules put the g1-e1 pulse's peak Rabi frequency at 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .compiler import ground_storage_unitary, memory_sequence, reverse_sequence, schedule_unitary
from .errors import DimensionMismatchError, IntegrationError, ScheduleError, SystemModelError
from .pulses import Pulse, PulseSchedule
from .states import DensityMatrix, UnitaryOperator, apply_unitary, fidelity
from .system import LevelSystem

# validation bounds for states produced by time stepping
TRAJECTORY_HERMITICITY_TOL = 1e-9
TRAJECTORY_TRACE_TOL = 1e-8
TRAJECTORY_PSD_FLOOR = -1e-8

_UNITARY_STEPS_PER_WIDTH = 200
_LINDBLAD_STEP_FRACTION = 0.01
_IDLE_SAMPLE_CAP = 32


@dataclass(frozen=True)
class DecayChannel:
    """Spontaneous decay from an excited level to a ground level, rate in units of the reference Rabi frequency."""

    source: str
    target: str
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise SystemModelError(f"decay rate must be >= 0, got {self.rate}")
        if self.source == self.target:
            raise SystemModelError("decay channel must connect two distinct levels")


def symmetric_decay_channels(system: LevelSystem, rate: float) -> tuple[DecayChannel, ...]:
    """The demonstration default: every excited level decays to every ground level at one rate."""
    return tuple(
        DecayChannel(src, dst, rate)
        for src in ("e1", "e2")
        for dst in ("g1", "g2")
        if system.has_transition(src, dst)
    )


class Trajectory:
    """Time-stamped density matrices plus derived observables."""

    def __init__(self, times: np.ndarray, states: np.ndarray, labels: tuple[str, ...]):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=complex)
        self.labels = tuple(labels)

    def __len__(self) -> int:
        return self.times.size

    def _index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SystemModelError(f"unknown level {label!r}") from None

    def state_at(self, i: int) -> DensityMatrix:
        return DensityMatrix(
            self.states[i],
            hermiticity_tol=TRAJECTORY_HERMITICITY_TOL,
            trace_tol=TRAJECTORY_TRACE_TOL,
            psd_floor=TRAJECTORY_PSD_FLOOR,
        )

    @property
    def final_state(self) -> DensityMatrix:
        return self.state_at(len(self) - 1)

    def populations(self) -> np.ndarray:
        """Real array (ntimes, nlevels) of diagonal entries."""
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    def population(self, label: str) -> np.ndarray:
        return self.populations()[:, self._index(label)]

    def coherence(self, label_a: str, label_b: str) -> np.ndarray:
        return self.states[:, self._index(label_a), self._index(label_b)]

    def trace_error(self) -> np.ndarray:
        return np.abs(np.trace(self.states, axis1=1, axis2=2) - 1.0)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.states - self.states.conj().transpose(0, 2, 1)).max())

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.states + self.states.conj().transpose(0, 2, 1))
        return float(np.linalg.eigvalsh(herm).min())


class DriveHamiltonian:
    """H(t) of a schedule bound to a system; Hermitian, zero outside pulse supports."""

    def __init__(self, system: LevelSystem, schedule: PulseSchedule):
        schedule.bind_check(system)
        self.system = system
        self.schedule = schedule

    def at(self, t: float) -> np.ndarray:
        # supports are half-open [t_start, t_end) so back-to-back pulses
        # never look simultaneously active at a shared boundary
        active = [p for p in self.schedule if p.t_start <= t < p.t_end]
        if len(active) > 1:
            raise ScheduleError(f"{len(active)} pulses active at t={t:g}; supports must not overlap")
        out = np.zeros((self.system.dim, self.system.dim), dtype=complex)
        for p in active:
            a = self.system.index(p.transition[0])
            b = self.system.index(p.transition[1])
            d = self.system.dipole(*p.transition)
            half_rabi = d * p.envelope.value(t)  # Omega/2 = d A(t)
            out[a, b] += half_rabi * np.exp(1j * p.carrier_phase)
            out[b, a] += half_rabi * np.exp(-1j * p.carrier_phase)
        return out


def assemble_hamiltonian(system: LevelSystem, schedule: PulseSchedule, t: float) -> np.ndarray:
    """The rotating-frame drive Hamiltonian at time t."""
    return DriveHamiltonian(system, schedule).at(t)


@dataclass(frozen=True)
class _Segment:
    t0: float
    t1: float
    pulse: Pulse | None

    @property
    def duration(self) -> float:
        return self.t1 - self.t0


def _segments(schedule: PulseSchedule, t_span: tuple[float, float]) -> list[_Segment]:
    start, end = t_span
    if end < start:
        raise ScheduleError(f"empty time span ({start:g}, {end:g})")
    if schedule.pulses and (schedule.t_start < start - 1e-12 or schedule.t_end > end + 1e-12):
        raise ScheduleError("time span does not cover the schedule")
    segs: list[_Segment] = []
    cursor = start
    for p in schedule:
        if p.t_start > cursor + 1e-12:
            segs.append(_Segment(cursor, p.t_start, None))
        segs.append(_Segment(p.t_start, p.t_end, p))
        cursor = p.t_end
    if end > cursor + 1e-12:
        segs.append(_Segment(cursor, end, None))
    return segs


def _default_span(schedule: PulseSchedule, t_span) -> tuple[float, float]:
    if t_span is not None:
        return (float(t_span[0]), float(t_span[1]))
    if schedule.pulses:
        return (schedule.t_start, schedule.t_end)
    return (0.0, 1.0)


def _check_inputs(rho0: DensityMatrix, system: LevelSystem, schedule: PulseSchedule):
    if rho0.dim != system.dim:
        raise DimensionMismatchError(f"state dim {rho0.dim} != system dim {system.dim}")
    schedule.bind_check(system)


def _drive_step_arrays(seg: _Segment, system: LevelSystem, step_scale: float):
    """Per-step (cos, sin) of the half angles d A(t_mid) h for one pulse segment."""
    pulse = seg.pulse
    width = pulse.envelope.width
    h_target = width / (_UNITARY_STEPS_PER_WIDTH * step_scale)
    if h_target <= 1e-12:
        raise IntegrationError(f"step-size underflow: h={h_target:g}")
    nsteps = max(1, math.ceil(seg.duration / h_target))
    h = seg.duration / nsteps
    mids = seg.t0 + (np.arange(nsteps) + 0.5) * h
    d = system.dipole(*pulse.transition)
    half = d * np.asarray(pulse.envelope.value(mids), dtype=float) * h
    a = system.index(pulse.transition[0])
    b = system.index(pulse.transition[1])
    times = seg.t0 + (np.arange(nsteps) + 1) * h
    return a, b, np.cos(half), np.sin(half), times, h


def propagate_unitary(
    rho0: DensityMatrix,
    system: LevelSystem,
    schedule: PulseSchedule,
    step_scale: float = 1.0,
    t_span: tuple[float, float] | None = None,
) -> Trajectory:
    """Closed-system evolution of rho0 through a schedule.

    Solves drho/dt = -i[H(t), rho] by conjugating with the exponential of
    -i H(t_mid) dt on each step. Trace and spectrum are preserved to
    roundoff because every step is an exact unitary.
    """
    _check_inputs(rho0, system, schedule)
    if step_scale <= 0:
        raise IntegrationError(f"step scale must be > 0, got {step_scale}")
    span = _default_span(schedule, t_span)
    rho = rho0.entries.astype(complex).copy()
    kern = _kernels.active()
    times = [span[0]]
    states = [rho.copy()]
    for seg in _segments(schedule, span):
        if seg.pulse is None:
            npts = max(1, min(_IDLE_SAMPLE_CAP, math.ceil(seg.duration)))
            times.extend(seg.t0 + (np.arange(npts) + 1) * (seg.duration / npts))
            states.extend(rho.copy() for _ in range(npts))
            continue
        a, b, cos_half, sin_half, seg_times, _h = _drive_step_arrays(seg, system, step_scale)
        out = np.empty((cos_half.size, rho.shape[0], rho.shape[0]), dtype=complex)
        kern.conjugate_drive_steps(rho, a, b, seg.pulse.carrier_phase, cos_half, sin_half, out)
        times.extend(seg_times)
        states.extend(out)
    stack = np.array(states)
    if not np.all(np.isfinite(stack.view(float))):
        raise IntegrationError("non-finite values in trajectory")
    return Trajectory(np.array(times), stack, system.labels)


def realized_unitary(
    system: LevelSystem,
    schedule: PulseSchedule,
    step_scale: float = 1.0,
) -> UnitaryOperator:
    """The total unitary the stepper realizes, extracted by propagating a basis of states."""
    schedule.bind_check(system)
    span = _default_span(schedule, None)
    mat = np.eye(system.dim, dtype=complex)
    kern = _kernels.active()
    for seg in _segments(schedule, span):
        if seg.pulse is None:
            continue
        a, b, cos_half, sin_half, _times, _h = _drive_step_arrays(seg, system, step_scale)
        kern.left_multiply_drive_steps(mat, a, b, seg.pulse.carrier_phase, cos_half, sin_half)
    return UnitaryOperator(mat)


def _coupling_matrix(system: LevelSystem, pulse: Pulse) -> np.ndarray:
    a = system.index(pulse.transition[0])
    b = system.index(pulse.transition[1])
    d = system.dipole(*pulse.transition)
    out = np.zeros((system.dim, system.dim), dtype=complex)
    out[a, b] = d * np.exp(1j * pulse.carrier_phase)
    out[b, a] = d * np.exp(-1j * pulse.carrier_phase)
    return out


def _peak_rabi(system: LevelSystem, schedule: PulseSchedule) -> float:
    peak = 0.0
    for p in schedule:
        peak = max(peak, 2.0 * system.dipole(*p.transition) * p.envelope.amplitude)
    return peak


def _channel_arrays(system: LevelSystem, channels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    src, dst, rates = [], [], []
    for ch in channels:
        if not system.has_transition(ch.source, ch.target):
            raise SystemModelError(f"decay channel {ch.source}->{ch.target} is not a declared transition")
        if system.energy(ch.source) <= system.energy(ch.target):
            raise SystemModelError(
                f"decay channel {ch.source}->{ch.target} must go from higher to lower energy"
            )
        src.append(system.index(ch.source))
        dst.append(system.index(ch.target))
        rates.append(ch.rate)
    return (
        np.array(src, dtype=np.int64),
        np.array(dst, dtype=np.int64),
        np.array(rates, dtype=float),
    )


def propagate_lindblad(
    rho0: DensityMatrix,
    system: LevelSystem,
    schedule: PulseSchedule,
    channels=(),
    step_scale: float = 1.0,
    t_span: tuple[float, float] | None = None,
) -> Trajectory:
    """Open-system evolution with decay channels L_c = |target><source|.

    Fixed-step classical RK4 with h <= min(0.01/max Omega, 0.01/max Gamma)
    (and at least 100 steps over the span). With no channels this agrees
    with `propagate_unitary` up to integrator error.
    """
    _check_inputs(rho0, system, schedule)
    if step_scale <= 0:
        raise IntegrationError(f"step scale must be > 0, got {step_scale}")
    span = _default_span(schedule, t_span)
    src, dst, rates = _channel_arrays(system, channels)
    bounds = [
        (span[1] - span[0]) / 100.0 if span[1] > span[0] else math.inf,
    ]
    peak = _peak_rabi(system, schedule)
    if peak > 0:
        bounds.append(_LINDBLAD_STEP_FRACTION / peak)
    if rates.size and rates.max() > 0:
        bounds.append(_LINDBLAD_STEP_FRACTION / rates.max())
    h_bound = min(bounds) / step_scale
    if not math.isfinite(h_bound):
        h_bound = 0.01 / step_scale
    if h_bound <= 1e-12:
        raise IntegrationError(f"step-size underflow: h={h_bound:g}")

    rho = rho0.entries.astype(complex).copy()
    kern = _kernels.active()
    zero_coupling = np.zeros((system.dim, system.dim), dtype=complex)
    times = [span[0]]
    states = [rho.copy()]
    for seg in _segments(schedule, span):
        nsteps = max(1, math.ceil(seg.duration / h_bound))
        h = seg.duration / nsteps
        grid = seg.t0 + np.arange(2 * nsteps + 1) * (h / 2.0)
        if seg.pulse is None:
            coupling = zero_coupling
            amps = np.zeros(grid.size)
        else:
            coupling = _coupling_matrix(system, seg.pulse)
            amps = np.asarray(seg.pulse.envelope.value(grid), dtype=float)
        out = np.empty((nsteps, system.dim, system.dim), dtype=complex)
        kern.lindblad_rk4_steps(rho, coupling, amps, h, src, dst, rates, out)
        times.extend(seg.t0 + (np.arange(nsteps) + 1) * h)
        states.extend(out)
    stack = np.array(states)
    if not np.all(np.isfinite(stack.view(float))):
        raise IntegrationError("non-finite values in trajectory")
    worst_trace = float(np.abs(np.trace(stack, axis1=1, axis2=2) - 1.0).max())
    if worst_trace > 1e-6:
        raise IntegrationError(f"trace drifted by {worst_trace:.3e}; integration unstable")
    return Trajectory(np.array(times), stack, system.labels)


def impulse_limit_check(schedule: PulseSchedule, system: LevelSystem, step_scale: float = 1.0) -> float:
    """Max entry deviation between the stepper's realized unitary and the ideal rotation product.

    Small deviations evidence that only pulse areas matter for the realized
    map, not envelope shapes.
    """
    realized = realized_unitary(system, schedule, step_scale=step_scale)
    ideal = schedule_unitary(system, schedule)
    return float(np.abs(realized.entries - ideal.entries).max())


@dataclass(frozen=True)
class StorageComparison:
    """Fidelities of holding a state on the optical pair vs. in the ground pair."""

    optical_fidelity: float
    memory_fidelity: float
    hold_time: float
    transfer: str


def storage_comparison(
    rho0: DensityMatrix,
    system: LevelSystem,
    channels,
    hold_time: float,
    transfer: str = "ideal",
    shape: str = "gaussian",
    step_scale: float = 1.0,
) -> StorageComparison:
    """Hold rho0 under decay directly vs. transferred into the ground pair and back.

    (a) optical: evolve rho0 with no drive for `hold_time`.
    (b) memory: forward storage transfer, hold, reverse transfer.
    `transfer="ideal"` applies the storage unitary instantaneously;
    `transfer="pulsed"` integrates the actual pulse schedules under decay.
    Both branches report Uhlmann fidelity against rho0.
    """
    if hold_time <= 0:
        raise ScheduleError(f"hold time must be > 0, got {hold_time}")
    if transfer not in ("ideal", "pulsed"):
        raise ScheduleError(f"transfer must be 'ideal' or 'pulsed', got {transfer!r}")
    empty = PulseSchedule(())
    held = propagate_lindblad(
        rho0, system, empty, channels, step_scale=step_scale, t_span=(0.0, hold_time)
    ).final_state
    optical = fidelity(held, rho0)

    if transfer == "ideal":
        storage = ground_storage_unitary(system)
        stored = apply_unitary(rho0, storage)
        held_mem = propagate_lindblad(
            stored, system, empty, channels, step_scale=step_scale, t_span=(0.0, hold_time)
        ).final_state
        retrieved = apply_unitary(held_mem, UnitaryOperator(storage.entries.conj().T))
    else:
        forward = memory_sequence(system, shape=shape)
        backward = reverse_sequence(forward, start=forward.t_end + hold_time)
        roundtrip = PulseSchedule(forward.pulses + backward.pulses)
        retrieved = propagate_lindblad(
            rho0, system, roundtrip, channels, step_scale=step_scale
        ).final_state
    memory = fidelity(retrieved, rho0)
    return StorageComparison(
        optical_fidelity=optical,
        memory_fidelity=memory,
        hold_time=hold_time,
        transfer=transfer,
    )
