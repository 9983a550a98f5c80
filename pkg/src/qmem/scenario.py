"""Declarative scenario files: parse, validate, and build simulation inputs.

Line-oriented `section.key = value` text; `#` starts a comment, blank lines
are ignored, lists are comma-separated. Sections: system, state, pulses,
decay, integrate, output, compile. A `# format=1` header line is written by
all emitters and checked when present.

Example::

    # format=1
    system.levels = g1:0, g2:0, e1:100, e2:120
    system.transitions = g1-e1:1, g1-e2:1, g2-e2:1
    system.nonaddressable = g2-e1:1
    state.amplitudes = 0.4472135954999579, 0, 0.8944271909999159, 0
    pulses.source = memory-sequence
    integrate.lindblad = off
    output.trajectory = trajectory.csv

Schedule sources (exactly one per scenario): `memory-sequence`,
`memory-roundtrip hold=<T>`, or `explicit` with one `pulses.pulse` line per
pulse, e.g.::

    pulses.source = explicit
    pulses.pulse = g1-e1, shape=square, area=3.141592653589793, start=0, duration=2, phase=1.5707963267948966
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compiler import ground_storage_unitary, memory_sequence, reverse_sequence
from .dynamics import DecayChannel
from .errors import ScenarioError, StateValidationError, SystemModelError
from .pulses import Pulse, PulseEnvelope, PulseSchedule, calibrate_amplitude
from .states import DensityMatrix, PureState, density_from_pure
from .system import Level, LevelSystem, Transition

FORMAT_VERSION = 1

_SECTIONS = {
    "system": {"levels", "transitions", "nonaddressable"},
    "state": {"amplitudes", "density"},
    "pulses": {"source", "shape", "width", "gap", "pulse"},
    "decay": {"channels"},
    "integrate": {"lindblad", "step_scale", "transfer"},
    "output": {"trajectory", "rotations", "report", "coherences"},
    "compile": {"target", "synthesize_phases"},
}


@dataclass
class Scenario:
    """A parsed scenario: system, initial state, schedule source and options."""

    system: LevelSystem
    initial: DensityMatrix
    schedule_source: str  # "explicit" | "memory-sequence" | "memory-roundtrip"
    hold_time: float | None = None
    explicit_pulses: tuple[Pulse, ...] = ()
    pulse_shape: str = "gaussian"
    pulse_width: float | None = None
    pulse_gap: float = 0.0
    channels: tuple[DecayChannel, ...] = ()
    lindblad: bool = False
    step_scale: float = 1.0
    transfer: str = "ideal"
    outputs: dict = field(default_factory=dict)
    coherences: tuple[tuple[str, str], ...] = ()
    compile_target: object = "memory"
    synthesize_phases: bool = False

    def build_schedule(self) -> PulseSchedule:
        """The concrete pulse schedule this scenario simulates."""
        if self.schedule_source == "explicit":
            return PulseSchedule(self.explicit_pulses)
        forward = memory_sequence(
            self.system, shape=self.pulse_shape, width=self.pulse_width, gap=self.pulse_gap
        )
        if self.schedule_source == "memory-sequence":
            return forward
        backward = reverse_sequence(forward, start=forward.t_end + self.hold_time)
        return PulseSchedule(forward.pulses + backward.pulses)

    def compile_target_matrix(self) -> np.ndarray:
        if isinstance(self.compile_target, str):
            if self.compile_target == "memory":
                return ground_storage_unitary(self.system).entries
            if self.compile_target == "identity":
                return np.eye(self.system.dim, dtype=complex)
            raise ScenarioError(f"unknown compile target {self.compile_target!r}")
        return np.asarray(self.compile_target, dtype=complex)


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _parse_float(text: str, line: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ScenarioError(f"{what}: not a number: {text!r}", line) from None


def _parse_complex(text: str, line: int, what: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ScenarioError(f"{what}: not a complex number: {text!r}", line) from None


def _parse_flag(text: str, line: int, what: str) -> bool:
    if text in ("on", "true", "yes", "1"):
        return True
    if text in ("off", "false", "no", "0"):
        return False
    raise ScenarioError(f"{what}: expected on/off, got {text!r}", line)


def _parse_edge(text: str, line: int) -> tuple[str, str]:
    parts = text.split("-")
    if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
        raise ScenarioError(f"expected a level pair like g1-e1, got {text!r}", line)
    return parts[0].strip(), parts[1].strip()


def _scan(text: str) -> list[tuple[int, str, str, str]]:
    """Tokenize into (line, section, key, value) entries."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("format="):
                version = body.split("=", 1)[1].strip()
                if version != str(FORMAT_VERSION):
                    raise ScenarioError(f"unsupported format version {version!r}", lineno)
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'section.key = value', got {line!r}", lineno)
        key_part, value = line.split("=", 1)
        key_part = key_part.strip()
        if "." not in key_part:
            raise ScenarioError(f"expected 'section.key', got {key_part!r}", lineno)
        section, key = key_part.split(".", 1)
        section, key = section.strip(), key.strip()
        base_key = key.split(".", 1)[0]
        if section not in _SECTIONS:
            raise ScenarioError(f"unknown section {section!r}", lineno)
        if base_key not in _SECTIONS[section] and not (section == "compile" and base_key == "row"):
            raise ScenarioError(f"unknown key {section}.{key}", lineno)
        entries.append((lineno, section, key, value.strip()))
    return entries


def _build_system(entries) -> LevelSystem:
    levels: list[Level] = []
    transitions: list[Transition] = []
    system_line = None
    for lineno, section, key, value in entries:
        if section != "system":
            continue
        system_line = lineno
        if key == "levels":
            for item in _split_list(value):
                if ":" in item:
                    label, energy = item.split(":", 1)
                    levels.append(Level(label.strip(), _parse_float(energy, lineno, "level energy")))
                else:
                    levels.append(Level(item, 0.0))
        elif key in ("transitions", "nonaddressable"):
            addressable = key == "transitions"
            for item in _split_list(value):
                if ":" in item:
                    pair, d_text = item.split(":", 1)
                    d = _parse_float(d_text, lineno, "dipole strength")
                else:
                    pair, d = item, 1.0
                a, b = _parse_edge(pair, lineno)
                transitions.append(Transition(a, b, d, addressable=addressable))
    if system_line is None or not levels:
        raise ScenarioError("no system declared")
    try:
        return LevelSystem(tuple(levels), tuple(transitions))
    except SystemModelError as exc:
        raise ScenarioError(str(exc), system_line) from None


def _build_state(entries, system: LevelSystem) -> DensityMatrix:
    amplitudes = None
    density_items: list[tuple[int, str]] = []
    amp_line = None
    for lineno, section, key, value in entries:
        if section != "state":
            continue
        if key == "amplitudes":
            amplitudes = value
            amp_line = lineno
        else:
            density_items.append((lineno, value))
    if amplitudes is not None and density_items:
        raise ScenarioError("state declared both as amplitudes and density entries", amp_line)
    if amplitudes is not None:
        values = [_parse_complex(v, amp_line, "amplitude") for v in _split_list(amplitudes)]
        if len(values) != system.dim:
            raise ScenarioError(
                f"expected {system.dim} amplitudes, got {len(values)}", amp_line
            )
        try:
            return density_from_pure(PureState(np.array(values)))
        except StateValidationError as exc:
            raise ScenarioError(str(exc), amp_line) from None
    if density_items:
        mat = np.zeros((system.dim, system.dim), dtype=complex)
        for lineno, value in density_items:
            parts = _split_list(value)
            if len(parts) != 4:
                raise ScenarioError("density entry must be 'a, b, re, im'", lineno)
            a, b = parts[0], parts[1]
            for label in (a, b):
                if label not in system.labels:
                    raise ScenarioError(f"undeclared level {label!r}", lineno)
            val = complex(
                _parse_float(parts[2], lineno, "density value"),
                _parse_float(parts[3], lineno, "density value"),
            )
            i, j = system.index(a), system.index(b)
            mat[i, j] = val
            if i != j:
                mat[j, i] = val.conjugate()
        try:
            return DensityMatrix(mat)
        except StateValidationError as exc:
            raise ScenarioError(str(exc), density_items[-1][0]) from None
    raise ScenarioError("no initial state declared")


def _parse_pulse(value: str, lineno: int, system: LevelSystem) -> Pulse:
    items = _split_list(value)
    if not items:
        raise ScenarioError("empty pulse declaration", lineno)
    a, b = _parse_edge(items[0], lineno)
    if not system.has_transition(a, b) or not system.transition(a, b).addressable:
        raise ScenarioError(f"pulse on undeclared or non-addressable edge {a}-{b}", lineno)
    fields: dict[str, str] = {}
    for item in items[1:]:
        if "=" not in item:
            raise ScenarioError(f"pulse option must be key=value, got {item!r}", lineno)
        k, v = item.split("=", 1)
        fields[k.strip()] = v.strip()
    shape = fields.pop("shape", "gaussian")
    phase = _parse_float(fields.pop("phase", "0"), lineno, "phase")
    amplitude = fields.pop("amplitude", None)
    area = fields.pop("area", None)
    if (amplitude is None) == (area is None):
        raise ScenarioError("pulse needs exactly one of amplitude= or area=", lineno)
    if shape == "gaussian":
        try:
            center = _parse_float(fields.pop("center"), lineno, "center")
            sigma = _parse_float(fields.pop("sigma"), lineno, "sigma")
        except KeyError as exc:
            raise ScenarioError(f"gaussian pulse needs {exc.args[0]}=", lineno) from None
        env = PulseEnvelope.gaussian(1.0, center, sigma)
    elif shape == "square":
        try:
            start = _parse_float(fields.pop("start"), lineno, "start")
            duration = _parse_float(fields.pop("duration"), lineno, "duration")
        except KeyError as exc:
            raise ScenarioError(f"square pulse needs {exc.args[0]}=", lineno) from None
        env = PulseEnvelope.square(1.0, start, duration)
    else:
        raise ScenarioError(f"unknown pulse shape {shape!r}", lineno)
    if fields:
        raise ScenarioError(f"unknown pulse option {sorted(fields)[0]!r}", lineno)
    if amplitude is not None:
        env = env.with_amplitude(_parse_float(amplitude, lineno, "amplitude"))
    else:
        env = env.with_amplitude(
            calibrate_amplitude(_parse_float(area, lineno, "area"), env)
        )
    return Pulse(env, (a, b), carrier_phase=phase)


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; raises `ScenarioError` with a line number."""
    entries = _scan(text)
    system = _build_system(entries)
    initial = _build_state(entries, system)

    source = None
    source_line = None
    hold_time = None
    pulse_entries: list[tuple[int, str]] = []
    shape, width, gap = "gaussian", None, 0.0
    channels: list[DecayChannel] = []
    lindblad = None
    step_scale = 1.0
    transfer = "ideal"
    outputs: dict[str, str] = {}
    coherences: list[tuple[str, str]] = []
    compile_target: object = "memory"
    compile_rows: dict[int, tuple[int, str]] = {}
    synthesize = False

    for lineno, section, key, value in entries:
        if section == "pulses":
            if key == "source":
                if source is not None:
                    raise ScenarioError("conflicting schedule sources: source already set", lineno)
                source_line = lineno
                if value == "memory-sequence":
                    source = "memory-sequence"
                elif value.startswith("memory-roundtrip"):
                    source = "memory-roundtrip"
                    rest = value[len("memory-roundtrip"):].strip()
                    if not rest.startswith("hold="):
                        raise ScenarioError("memory-roundtrip needs hold=<time>", lineno)
                    hold_time = _parse_float(rest[len("hold="):], lineno, "hold time")
                    if hold_time <= 0:
                        raise ScenarioError(f"hold time must be > 0, got {hold_time:g}", lineno)
                elif value == "explicit":
                    source = "explicit"
                else:
                    raise ScenarioError(f"unknown schedule source {value!r}", lineno)
            elif key == "pulse":
                pulse_entries.append((lineno, value))
            elif key == "shape":
                if value not in ("gaussian", "square"):
                    raise ScenarioError(f"unknown pulse shape {value!r}", lineno)
                shape = value
            elif key == "width":
                width = _parse_float(value, lineno, "width")
            elif key == "gap":
                gap = _parse_float(value, lineno, "gap")
        elif section == "decay" and key == "channels":
            for item in _split_list(value):
                if ":" not in item:
                    raise ScenarioError(f"decay channel must be src->dst:rate, got {item!r}", lineno)
                pair, rate_text = item.rsplit(":", 1)
                if "->" not in pair:
                    raise ScenarioError(f"decay channel must be src->dst:rate, got {item!r}", lineno)
                src, dst = (p.strip() for p in pair.split("->", 1))
                for label in (src, dst):
                    if label not in system.labels:
                        raise ScenarioError(f"undeclared level {label!r}", lineno)
                channels.append(DecayChannel(src, dst, _parse_float(rate_text, lineno, "decay rate")))
        elif section == "integrate":
            if key == "lindblad":
                lindblad = _parse_flag(value, lineno, "integrate.lindblad")
            elif key == "step_scale":
                step_scale = _parse_float(value, lineno, "step scale")
                if step_scale <= 0:
                    raise ScenarioError(f"step scale must be > 0, got {step_scale:g}", lineno)
            elif key == "transfer":
                if value not in ("ideal", "pulsed"):
                    raise ScenarioError(f"transfer must be ideal or pulsed, got {value!r}", lineno)
                transfer = value
        elif section == "output":
            if key == "coherences":
                for item in _split_list(value):
                    a, b = _parse_edge(item, lineno)
                    for label in (a, b):
                        if label not in system.labels:
                            raise ScenarioError(f"undeclared level {label!r}", lineno)
                    coherences.append((a, b))
            else:
                outputs[key] = value
        elif section == "compile":
            if key == "target":
                if value not in ("memory", "identity"):
                    raise ScenarioError(f"compile target must be memory or identity, got {value!r}", lineno)
                compile_target = value
            elif key == "synthesize_phases":
                synthesize = _parse_flag(value, lineno, "compile.synthesize_phases")
            elif key.startswith("row."):
                try:
                    row = int(key[len("row."):])
                except ValueError:
                    raise ScenarioError(f"bad row index in {key!r}", lineno) from None
                compile_rows[row] = (lineno, value)

    if source is None:
        if pulse_entries:
            raise ScenarioError("pulses declared without pulses.source = explicit", pulse_entries[0][0])
        raise ScenarioError("no schedule source declared")
    if pulse_entries and source != "explicit":
        raise ScenarioError(
            f"conflicting schedule sources: {source} plus explicit pulse lines", pulse_entries[0][0]
        )
    explicit: list[Pulse] = []
    if source == "explicit":
        if not pulse_entries:
            raise ScenarioError("explicit schedule declared but no pulses.pulse lines", source_line)
        explicit = [_parse_pulse(value, lineno, system) for lineno, value in pulse_entries]

    if compile_rows:
        n = system.dim
        if sorted(compile_rows) != list(range(n)):
            raise ScenarioError(f"compile.row.* must cover rows 0..{n - 1}")
        mat = np.zeros((n, n), dtype=complex)
        for i in range(n):
            lineno, value = compile_rows[i]
            row_vals = [_parse_complex(v, lineno, "matrix entry") for v in _split_list(value)]
            if len(row_vals) != n:
                raise ScenarioError(f"expected {n} entries in row {i}", lineno)
            mat[i] = row_vals
        compile_target = mat

    if not coherences:
        coherences = [
            (a, b)
            for a, b in (("g1", "e1"), ("g1", "g2"))
            if a in system.labels and b in system.labels
        ]

    return Scenario(
        system=system,
        initial=initial,
        schedule_source=source,
        hold_time=hold_time,
        explicit_pulses=tuple(explicit),
        pulse_shape=shape,
        pulse_width=width,
        pulse_gap=gap,
        channels=tuple(channels),
        lindblad=bool(channels) if lindblad is None else lindblad,
        step_scale=step_scale,
        transfer=transfer,
        outputs=outputs,
        coherences=tuple(coherences),
        compile_target=compile_target,
        synthesize_phases=synthesize,
    )
