import math

import numpy as np
import pytest
from conftest import RHO_OPTICAL, max_dev

from qmem import ScenarioError, addressable_edges
from qmem.cli import bundled_scenario_text
from qmem.scenario import parse_scenario

MINIMAL_SYSTEM = """
system.levels = g1:0, g2:0, e1:100, e2:120
system.transitions = g1-e1:1, g1-e2:1, g2-e2:1
system.nonaddressable = g2-e1:1
state.amplitudes = 0.4472135954999579, 0, 0.8944271909999159, 0
"""


def test_bundled_memory_store_parses():
    sc = parse_scenario(bundled_scenario_text("memory_store"))
    assert sc.system.labels == ("g1", "g2", "e1", "e2")
    assert len(addressable_edges(sc.system)) == 3
    assert sc.schedule_source == "memory-sequence"
    assert not sc.lindblad
    assert abs(sc.initial.entries[0, 0] - 0.2) < 1e-12
    assert abs(sc.initial.entries[2, 2] - 0.8) < 1e-12
    assert abs(sc.initial.entries[0, 2] - 0.4) < 1e-12
    sched = sc.build_schedule()
    assert len(sched) == 5


def test_bundled_roundtrip_and_decay_parse():
    rt = parse_scenario(bundled_scenario_text("memory_roundtrip"))
    assert rt.schedule_source == "memory-roundtrip"
    assert rt.hold_time == 10.0
    assert len(rt.build_schedule()) == 10
    dd = parse_scenario(bundled_scenario_text("decay_demo"))
    assert dd.lindblad
    assert len(dd.channels) == 4
    assert all(ch.rate == 0.05 for ch in dd.channels)
    assert dd.transfer == "ideal"


def test_empty_file_reports_no_system():
    with pytest.raises(ScenarioError, match="no system declared"):
        parse_scenario("")


def test_pulse_on_undeclared_edge_names_line_and_edge():
    text = MINIMAL_SYSTEM + (
        "pulses.source = explicit\n"
        "pulses.pulse = g1-g2, shape=square, area=1, start=0, duration=1\n"
    )
    lineno = text.splitlines().index("pulses.pulse = g1-g2, shape=square, area=1, start=0, duration=1") + 1
    with pytest.raises(ScenarioError, match=rf"line {lineno}.*g1-g2"):
        parse_scenario(text)


def test_unknown_key_rejected_with_line():
    with pytest.raises(ScenarioError, match=r"line 1.*unknown key"):
        parse_scenario("system.colour = blue\n")


def test_unknown_section_rejected():
    with pytest.raises(ScenarioError, match="unknown section"):
        parse_scenario("banana.split = yes\n")


def test_conflicting_schedule_sources():
    text = MINIMAL_SYSTEM + (
        "pulses.source = memory-sequence\n"
        "pulses.pulse = g1-e1, shape=square, area=1, start=0, duration=1\n"
    )
    with pytest.raises(ScenarioError, match="conflicting schedule sources"):
        parse_scenario(text)
    with pytest.raises(ScenarioError, match="conflicting schedule sources"):
        parse_scenario(
            MINIMAL_SYSTEM + "pulses.source = memory-sequence\npulses.source = explicit\n"
        )


def test_missing_schedule_source():
    with pytest.raises(ScenarioError, match="no schedule source"):
        parse_scenario(MINIMAL_SYSTEM)


def test_explicit_schedule_builds_pulses():
    text = MINIMAL_SYSTEM + (
        "pulses.source = explicit\n"
        "pulses.pulse = g1-e1, shape=square, area=1.5707963267948966, start=0, duration=2, phase=1.5707963267948966\n"
        "pulses.pulse = g2-e2, shape=gaussian, amplitude=0.2, center=6, sigma=0.5\n"
    )
    sc = parse_scenario(text)
    sched = sc.build_schedule()
    assert len(sched) == 2
    assert sched.pulses[0].transition == ("g1", "e1")
    assert abs(sched.pulses[0].envelope.amplitude - math.pi / 4.0) < 1e-12
    assert sched.pulses[1].envelope.shape == "gaussian"


def test_pulse_requires_exactly_one_of_amplitude_or_area():
    base = MINIMAL_SYSTEM + "pulses.source = explicit\n"
    with pytest.raises(ScenarioError, match="exactly one of amplitude"):
        parse_scenario(base + "pulses.pulse = g1-e1, shape=square, start=0, duration=1\n")
    with pytest.raises(ScenarioError, match="exactly one of amplitude"):
        parse_scenario(
            base + "pulses.pulse = g1-e1, shape=square, amplitude=1, area=1, start=0, duration=1\n"
        )


def test_density_entries_state():
    text = (
        "system.levels = g1:0, g2:0, e1:100, e2:120\n"
        "system.transitions = g1-e1:1, g1-e2:1, g2-e2:1\n"
        "state.density = g1, g1, 0.2, 0\n"
        "state.density = e1, e1, 0.8, 0\n"
        "state.density = g1, e1, 0.4, 0\n"
        "pulses.source = memory-sequence\n"
    )
    sc = parse_scenario(text)
    assert max_dev(sc.initial.entries, RHO_OPTICAL) < 1e-12


def test_state_both_forms_rejected():
    text = MINIMAL_SYSTEM + "state.density = g1, g1, 1, 0\npulses.source = memory-sequence\n"
    with pytest.raises(ScenarioError, match="both"):
        parse_scenario(text)


def test_unnormalized_amplitudes_rejected_with_line():
    text = (
        "system.levels = g1:0, g2:0, e1:100, e2:120\n"
        "system.transitions = g1-e1:1\n"
        "state.amplitudes = 1, 1, 0, 0\n"
        "pulses.source = memory-sequence\n"
    )
    with pytest.raises(ScenarioError, match="line 3"):
        parse_scenario(text)


def test_decay_channel_undeclared_level():
    text = MINIMAL_SYSTEM + "pulses.source = memory-sequence\ndecay.channels = e9->g1:0.1\n"
    with pytest.raises(ScenarioError, match="e9"):
        parse_scenario(text)


def test_roundtrip_requires_positive_hold():
    with pytest.raises(ScenarioError, match="hold"):
        parse_scenario(MINIMAL_SYSTEM + "pulses.source = memory-roundtrip hold=0\n")
    with pytest.raises(ScenarioError, match="hold"):
        parse_scenario(MINIMAL_SYSTEM + "pulses.source = memory-roundtrip\n")


def test_format_version_checked():
    with pytest.raises(ScenarioError, match="format version"):
        parse_scenario("# format=9\n" + MINIMAL_SYSTEM + "pulses.source = memory-sequence\n")


def test_compile_target_rows():
    rows = "\n".join(
        f"compile.row.{i} = {', '.join(str(int(v)) for v in row)}"
        for i, row in enumerate(np.eye(4))
    )
    sc = parse_scenario(MINIMAL_SYSTEM + "pulses.source = memory-sequence\n" + rows + "\n")
    assert max_dev(sc.compile_target_matrix(), np.eye(4)) == 0.0


def test_compile_target_default_is_storage_map():
    sc = parse_scenario(MINIMAL_SYSTEM + "pulses.source = memory-sequence\n")
    target = sc.compile_target_matrix()
    assert max_dev(target @ target.conj().T, np.eye(4)) < 1e-12
    assert abs(target[1, 2] + 1.0) < 1e-15  # g2 row picks up e1 content


def test_default_coherence_selection():
    sc = parse_scenario(MINIMAL_SYSTEM + "pulses.source = memory-sequence\n")
    assert sc.coherences == (("g1", "e1"), ("g1", "g2"))


def test_pulse_width_and_gap_reach_schedule():
    sc = parse_scenario(
        MINIMAL_SYSTEM + "pulses.source = memory-sequence\npulses.shape = square\n"
        "pulses.width = 0.5\npulses.gap = 1.5\n"
    )
    sched = sc.build_schedule()
    assert all(p.envelope.duration == 0.5 for p in sched)
    assert abs(sched.pulses[1].t_start - sched.pulses[0].t_end - 1.5) < 1e-12


def test_lindblad_defaults_follow_channels():
    no_decay = parse_scenario(MINIMAL_SYSTEM + "pulses.source = memory-sequence\n")
    assert not no_decay.lindblad
    with_decay = parse_scenario(
        MINIMAL_SYSTEM + "pulses.source = memory-sequence\ndecay.channels = e1->g1:0.1\n"
    )
    assert with_decay.lindblad
