"""Command-line front end: run compile/simulate/store-retrieve on a scenario.

    qmem compile|simulate|store-retrieve <scenario> [--out DIR] [--step-scale F] [--seed N]

<scenario> is a path, or the name of a bundled scenario (memory_store,
memory_roundtrip, decay_demo). Artifacts:

* compile: rotation-list CSV `edge_a, edge_b, theta, phi` plus a report
  with residual diagnostics.
* simulate: trajectory CSV `t, pop_<level>..., re_<ab>, im_<ab>..., trace_err`
  with >= 12 significant digits per value.
* store-retrieve: flat `key = value` report with both storage fidelities.

All output files start with a `# format=1` line. Exit status 0 on success;
partial outputs are removed on failure.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .compiler import decompose_on_system
from .dynamics import Trajectory, propagate_lindblad, propagate_unitary, storage_comparison
from .errors import QmemError, ScenarioError
from .scenario import FORMAT_VERSION, Scenario, parse_scenario

_BUNDLED = ("memory_store", "memory_roundtrip", "decay_demo")


def bundled_scenario_text(name: str) -> str:
    """Source text of a bundled scenario."""
    ref = resources.files("qmem.scenarios").joinpath(f"{name}.scn")
    return ref.read_text(encoding="utf-8")


def load_scenario(name_or_path: str) -> Scenario:
    """Load a scenario from a path or a bundled name."""
    path = Path(name_or_path)
    if path.exists():
        return parse_scenario(path.read_text(encoding="utf-8"))
    name = name_or_path.removesuffix(".scn")
    if name in _BUNDLED:
        return parse_scenario(bundled_scenario_text(name))
    raise ScenarioError(f"scenario not found: {name_or_path!r} (bundled: {', '.join(_BUNDLED)})")


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _write_trajectory_csv(path: Path, trajectory: Trajectory, coherences) -> None:
    labels = trajectory.labels
    header = ["t"] + [f"pop_{l}" for l in labels]
    for a, b in coherences:
        header += [f"re_{a}{b}", f"im_{a}{b}"]
    header.append("trace_err")
    pops = trajectory.populations()
    cols = [trajectory.times] + [pops[:, i] for i in range(len(labels))]
    for a, b in coherences:
        coh = trajectory.coherence(a, b)
        cols += [coh.real, coh.imag]
    cols.append(trajectory.trace_error())
    lines = [f"# format={FORMAT_VERSION}", ", ".join(header)]
    for row in zip(*cols):
        lines.append(", ".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_report(path: Path, items) -> None:
    lines = [f"# format={FORMAT_VERSION}"]
    lines += [f"{key} = {value}" for key, value in items]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_path(out_dir: Path, configured: str | None, default: str) -> Path:
    name = configured if configured else default
    path = Path(name)
    if not path.is_absolute():
        path = out_dir / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def run(scenario: Scenario, command: str, out_dir: Path, step_scale: float | None = None) -> list[Path]:
    """Execute one command against a parsed scenario; returns written paths."""
    scale = step_scale if step_scale is not None else scenario.step_scale
    written: list[Path] = []
    try:
        if command == "compile":
            result = decompose_on_system(
                scenario.compile_target_matrix(),
                scenario.system,
                synthesize_phases=scenario.synthesize_phases,
            )
            rot_path = _out_path(out_dir, scenario.outputs.get("rotations"), "rotations.csv")
            lines = [f"# format={FORMAT_VERSION}", "edge_a, edge_b, theta, phi"]
            for r in result.rotations:
                lines.append(f"{r.edge[0]}, {r.edge[1]}, {_fmt(r.theta)}, {_fmt(r.phi)}")
            rot_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            written.append(rot_path)

            report_path = _out_path(out_dir, scenario.outputs.get("report"), "compile_report.txt")
            remainder = result.remainder
            off = remainder - np.diag(np.diag(remainder))
            items = [
                ("rotations", len(result.rotations)),
                ("exact", "true" if result.exact else "false"),
                ("unreachable", ",".join(result.unreachable) if result.unreachable else "none"),
                ("max_offdiagonal_remainder", _fmt(float(np.abs(off).max()) if off.size else 0.0)),
            ]
            for label, value in zip(scenario.system.labels, result.residual_diagonal):
                items.append((f"residual_{label}", f"{_fmt(value.real)} {_fmt(value.imag)}"))
            _write_report(report_path, items)
            written.append(report_path)

        elif command == "simulate":
            schedule = scenario.build_schedule()
            if scenario.lindblad:
                trajectory = propagate_lindblad(
                    scenario.initial, scenario.system, schedule, scenario.channels, step_scale=scale
                )
            else:
                trajectory = propagate_unitary(
                    scenario.initial, scenario.system, schedule, step_scale=scale
                )
            csv_path = _out_path(out_dir, scenario.outputs.get("trajectory"), "trajectory.csv")
            _write_trajectory_csv(csv_path, trajectory, scenario.coherences)
            written.append(csv_path)

        elif command == "store-retrieve":
            if scenario.schedule_source != "memory-roundtrip":
                raise ScenarioError("store-retrieve needs pulses.source = memory-roundtrip hold=<T>")
            report = storage_comparison(
                scenario.initial,
                scenario.system,
                scenario.channels,
                scenario.hold_time,
                transfer=scenario.transfer,
                shape=scenario.pulse_shape,
                step_scale=scale,
            )
            report_path = _out_path(out_dir, scenario.outputs.get("report"), "storage_report.txt")
            items = [
                ("optical_fidelity", _fmt(report.optical_fidelity)),
                ("memory_fidelity", _fmt(report.memory_fidelity)),
                ("hold_time", _fmt(report.hold_time)),
                ("transfer", report.transfer),
                ("step_scale", _fmt(scale)),
                ("channels", len(scenario.channels)),
            ]
            for ch in scenario.channels:
                items.append((f"gamma_{ch.source}_{ch.target}", _fmt(ch.rate)))
            _write_report(report_path, items)
            written.append(report_path)

        else:
            raise ScenarioError(f"unknown command {command!r}")
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qmem",
        description="Compile and simulate pulse sequences for ground-state quantum memory.",
    )
    parser.add_argument("command", choices=["compile", "simulate", "store-retrieve"])
    parser.add_argument("scenario", help="scenario path or bundled name")
    parser.add_argument("--out", default=".", help="output directory (default: current directory)")
    parser.add_argument("--step-scale", type=float, default=None, help="override the scenario's step scale")
    parser.add_argument("--seed", type=int, default=None, help="reserved for randomized harnesses")
    args = parser.parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        written = run(scenario, args.command, Path(args.out), step_scale=args.step_scale)
    except QmemError as exc:
        print(f"qmem: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
