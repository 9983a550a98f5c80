"""Pulse envelopes, areas, amplitude calibration and ideal rotations.

Conventions (fixed package-wide):

* Rabi frequency of a pulse on an edge with dipole strength d is
  Omega(t) = 2 d A(t), so a pulse of area `a` realizes a rotation angle
  theta = 2 d a. The area condition pi/(2d) therefore gives theta = pi.
* A carrier phase of pi/2 produces the real antisymmetric generator
  |a><b| - |b><a|; the ideal rotation of a pulse has phase
  phi' = carrier_phase - pi/2.
* Gaussian envelopes are truncated to +-4 sigma and all areas refer to the
  truncated support, which is exactly what the integrator sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import ScheduleError
from .system import LevelSystem

GAUSSIAN_TRUNCATION = 4.0
# unit-amplitude area of a sigma=1 gaussian on the truncated support
_GAUSS_UNIT_AREA = math.sqrt(2.0 * math.pi) * float(erf(GAUSSIAN_TRUNCATION / math.sqrt(2.0)))


@dataclass(frozen=True)
class PulseEnvelope:
    """A gaussian or square pulse envelope A(t) in field units.

    Gaussian: A0 exp(-(t - center)^2 / (2 sigma^2)) on [center - 4 sigma,
    center + 4 sigma]. Square: A0 on [start, start + duration].
    """

    shape: str
    amplitude: float
    center: float | None = None
    sigma: float | None = None
    start: float | None = None
    duration: float | None = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise ScheduleError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.shape == "gaussian":
            if self.center is None or self.sigma is None:
                raise ScheduleError("gaussian envelope needs center and sigma")
            if self.sigma <= 0:
                raise ScheduleError(f"sigma must be > 0, got {self.sigma}")
        elif self.shape == "square":
            if self.start is None or self.duration is None:
                raise ScheduleError("square envelope needs start and duration")
            if self.duration <= 0:
                raise ScheduleError(f"duration must be > 0, got {self.duration}")
        else:
            raise ScheduleError(f"unknown envelope shape {self.shape!r}")

    @classmethod
    def gaussian(cls, amplitude: float, center: float, sigma: float) -> "PulseEnvelope":
        return cls("gaussian", amplitude, center=center, sigma=sigma)

    @classmethod
    def square(cls, amplitude: float, start: float, duration: float) -> "PulseEnvelope":
        return cls("square", amplitude, start=start, duration=duration)

    @property
    def t_start(self) -> float:
        if self.shape == "gaussian":
            return self.center - GAUSSIAN_TRUNCATION * self.sigma
        return self.start

    @property
    def t_end(self) -> float:
        if self.shape == "gaussian":
            return self.center + GAUSSIAN_TRUNCATION * self.sigma
        return self.start + self.duration

    @property
    def width(self) -> float:
        """Shape parameter: sigma for gaussian, duration for square."""
        return self.sigma if self.shape == "gaussian" else self.duration

    def value(self, t):
        """Envelope amplitude at time(s) t (zero outside the support)."""
        t = np.asarray(t, dtype=float)
        if self.shape == "gaussian":
            inside = (t >= self.t_start) & (t <= self.t_end)
            out = np.where(
                inside,
                self.amplitude * np.exp(-((t - self.center) ** 2) / (2.0 * self.sigma**2)),
                0.0,
            )
        else:
            inside = (t >= self.t_start) & (t <= self.t_end)
            out = np.where(inside, self.amplitude, 0.0)
        return out if out.ndim else float(out)

    def with_amplitude(self, amplitude: float) -> "PulseEnvelope":
        return PulseEnvelope(
            self.shape, amplitude,
            center=self.center, sigma=self.sigma,
            start=self.start, duration=self.duration,
        )

    def shifted(self, dt: float) -> "PulseEnvelope":
        if self.shape == "gaussian":
            return PulseEnvelope.gaussian(self.amplitude, self.center + dt, self.sigma)
        return PulseEnvelope.square(self.amplitude, self.start + dt, self.duration)


def pulse_area(envelope: PulseEnvelope) -> float:
    """Total area integral |A(t)| dt over the (truncated) support.

    Closed form for both shapes; the gaussian form carries the +-4 sigma
    truncation correction via erf.
    """
    if envelope.shape == "gaussian":
        return envelope.amplitude * envelope.sigma * _GAUSS_UNIT_AREA
    return envelope.amplitude * envelope.duration


def calibrate_amplitude(target_area: float, envelope: PulseEnvelope) -> float:
    """Amplitude A0 such that the envelope (with its width fixed) has the target area."""
    if target_area <= 0:
        raise ScheduleError(f"target area must be > 0, got {target_area}")
    unit = pulse_area(envelope.with_amplitude(1.0))
    return target_area / unit


@dataclass(frozen=True)
class Pulse:
    """An envelope bound to one transition with a carrier phase (radians)."""

    envelope: PulseEnvelope
    transition: tuple[str, str]
    carrier_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "transition", tuple(self.transition))
        if len(self.transition) != 2 or self.transition[0] == self.transition[1]:
            raise ScheduleError(f"transition must be a pair of distinct levels, got {self.transition}")

    @property
    def t_start(self) -> float:
        return self.envelope.t_start

    @property
    def t_end(self) -> float:
        return self.envelope.t_end


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    """Time-ordered pulses with non-overlapping supports.

    Listing order is time order: the first pulse acts first. The realized
    unitary is therefore R(p_k) ... R(p_1) for the ideal rotations R.
    """

    pulses: tuple[Pulse, ...]

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        prev = None
        for p in self.pulses:
            if prev is not None and p.t_start < prev.t_end - 1e-12:
                raise ScheduleError(
                    f"pulse supports overlap: [{p.t_start:g}, {p.t_end:g}] begins "
                    f"before [{prev.t_start:g}, {prev.t_end:g}] ends"
                )
            prev = p

    def __len__(self) -> int:
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    @property
    def t_start(self) -> float:
        return self.pulses[0].t_start if self.pulses else 0.0

    @property
    def t_end(self) -> float:
        return self.pulses[-1].t_end if self.pulses else 0.0

    def bind_check(self, system: LevelSystem) -> None:
        """Require every pulse to sit on an addressable edge of `system`."""
        for p in self.pulses:
            a, b = p.transition
            if not system.has_transition(a, b) or not system.transition(a, b).addressable:
                raise ScheduleError(f"pulse drives non-addressable pair {a}-{b}")


def ideal_rotation(pulse: Pulse, d: float):
    """The planar rotation a pulse realizes in the impulse (area-only) limit.

    Angle theta = 2 d area, rotation phase phi' = carrier_phase - pi/2, so a
    pi/(2d)-area pulse with carrier phase pi/2 gives the real pi rotation
    exp[(pi/2)(|a><b| - |b><a|)].
    """
    from .compiler import PlanarRotation

    theta = 2.0 * d * pulse_area(pulse.envelope)
    return PlanarRotation(edge=pulse.transition, theta=theta, phi=pulse.carrier_phase - math.pi / 2.0)
