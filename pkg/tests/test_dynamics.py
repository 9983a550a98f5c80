import math

import numpy as np
import pytest
from conftest import RHO_GROUND, RHO_OPTICAL, max_dev
from scipy.integrate import solve_ivp

from qmem import (
    DecayChannel,
    DensityMatrix,
    IntegrationError,
    Pulse,
    PulseEnvelope,
    PulseSchedule,
    PureState,
    ScheduleError,
    SystemModelError,
    assemble_hamiltonian,
    density_from_pure,
    fidelity,
    four_level_system,
    impulse_limit_check,
    memory_sequence,
    propagate_lindblad,
    propagate_unitary,
    realized_unitary,
    reverse_sequence,
    storage_comparison,
    symmetric_decay_channels,
)


@pytest.fixture
def sys4():
    return four_level_system()


@pytest.fixture
def rho_super():
    return density_from_pure(PureState(np.array([1, 0, 2, 0]) / np.sqrt(5)))


def square_pulse(edge, area, start=0.0, duration=1.0, phase=math.pi / 2.0, d=1.0):
    env = PulseEnvelope.square(area / duration, start, duration)
    return Pulse(env, edge, carrier_phase=phase)


# ---------------------------------------------------------------- Hamiltonian


def test_hamiltonian_zero_outside_supports(sys4):
    sched = memory_sequence(sys4)
    for t in (-5.0, sched.t_end + 1e-6, sched.t_end + 40.0):
        assert max_dev(assemble_hamiltonian(sys4, sched, t), np.zeros((4, 4))) == 0.0


def test_hamiltonian_square_pulse_entries(sys4):
    a0 = 0.37
    sched = PulseSchedule((Pulse(PulseEnvelope.square(a0, 0.0, 2.0), ("g1", "e1"), math.pi / 2.0),))
    h = assemble_hamiltonian(sys4, sched, 1.0)
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 2] = 1j * a0  # d*A0 with d=1, phase pi/2
    expected[2, 0] = -1j * a0
    assert max_dev(h, expected) < 1e-15


def test_hamiltonian_hermitian_at_random_times(sys4, rng):
    sched = memory_sequence(sys4)
    times = rng.uniform(sched.t_start - 1.0, sched.t_end + 1.0, size=1000)
    for t in times:
        h = assemble_hamiltonian(sys4, sched, float(t))
        assert max_dev(h, h.conj().T) < 1e-15


def test_hamiltonian_rejects_overlapping_pulses(sys4):
    p1 = Pulse(PulseEnvelope.square(1.0, 0.0, 2.0), ("g1", "e1"))
    p2 = Pulse(PulseEnvelope.square(1.0, 1.0, 2.0), ("g2", "e2"))
    with pytest.raises(ScheduleError, match="overlap"):
        PulseSchedule((p1, p2))
    # a schedule smuggled past construction is still rejected at evaluation
    bad = object.__new__(PulseSchedule)
    object.__setattr__(bad, "pulses", (p1, p2))
    with pytest.raises(ScheduleError, match="active"):
        assemble_hamiltonian(sys4, bad, 1.5)


# ------------------------------------------------------------- unitary stepper


def test_rabi_inversion_square_pulse(sys4):
    # pi rotation: envelope area pi/(2d) fully inverts the populations
    sched = PulseSchedule((square_pulse(("g1", "e1"), math.pi / 2.0, duration=2.0),))
    rho0 = density_from_pure(PureState([1, 0, 0, 0]))
    traj = propagate_unitary(rho0, sys4, sched)
    final = traj.final_state
    assert abs(final.population(0) - 0.0) < 1e-8
    assert abs(final.population(2) - 1.0) < 1e-8
    # full trajectory follows the analytic Rabi solution sin^2(d A0 t)
    a0 = math.pi / 4.0
    expected = np.sin(a0 * traj.times) ** 2
    assert max_dev(traj.population("e1"), expected) < 1e-8


def test_empty_schedule_is_constant(sys4, rho_super):
    traj = propagate_unitary(rho_super, sys4, PulseSchedule(()))
    assert max_dev(traj.states, np.broadcast_to(rho_super.entries, traj.states.shape)) == 0.0


def test_storage_sequence_endpoint(sys4, rho_super):
    traj = propagate_unitary(rho_super, sys4, memory_sequence(sys4))
    assert max_dev(traj.final_state.entries, RHO_GROUND) < 1e-6


def test_unitary_preserves_trace_purity_hermiticity(sys4, rho_super):
    traj = propagate_unitary(rho_super, sys4, memory_sequence(sys4))
    assert traj.trace_error().max() < 1e-8
    assert traj.hermiticity_defect() < 1e-9
    assert traj.min_eigenvalue() > -1e-7
    purities = [traj.state_at(i).purity() for i in range(0, len(traj), 997)]
    assert max(abs(p - rho_super.purity()) for p in purities) < 1e-7


def test_rotating_frame_observables_invariant(sys4, rho_super):
    # conjugating by the lab-frame phase factors exp(-i E_k t) must not
    # change populations; the ground pair is degenerate so its coherence
    # is invariant too (optical coherences are rotating-frame quantities)
    traj = propagate_unitary(rho_super, sys4, memory_sequence(sys4))
    i = len(traj) // 2
    t = traj.times[i]
    state = traj.states[i]
    energies = np.array([sys4.energy(l) for l in sys4.labels])
    frame = np.diag(np.exp(-1j * energies * t))
    lab = frame @ state @ frame.conj().T
    assert max_dev(np.diag(lab), np.diag(state)) < 1e-14
    assert abs(lab[0, 1] - state[0, 1]) < 1e-14


def test_step_scale_refines(sys4, rho_super):
    sched = memory_sequence(sys4)
    coarse = propagate_unitary(rho_super, sys4, sched, step_scale=0.25).final_state.entries
    fine = propagate_unitary(rho_super, sys4, sched, step_scale=4.0).final_state.entries
    assert max_dev(fine, RHO_GROUND) < max_dev(coarse, RHO_GROUND)


def test_propagate_rejects_bad_inputs(sys4, rho_super):
    with pytest.raises(IntegrationError):
        propagate_unitary(rho_super, sys4, memory_sequence(sys4), step_scale=0.0)
    small = DensityMatrix(np.eye(2) / 2)
    with pytest.raises(Exception):
        propagate_unitary(small, sys4, memory_sequence(sys4))


# ---------------------------------------------------------------- impulse limit


def test_impulse_limit_gaussian(sys4):
    assert impulse_limit_check(memory_sequence(sys4), sys4) < 1e-6


def test_impulse_limit_square(sys4):
    assert impulse_limit_check(memory_sequence(sys4, shape="square"), sys4) < 1e-6


def test_envelope_shape_does_not_matter(sys4):
    u_gauss = realized_unitary(sys4, memory_sequence(sys4)).entries
    u_square = realized_unitary(sys4, memory_sequence(sys4, shape="square")).entries
    assert max_dev(u_gauss, u_square) < 1e-6


def test_amplitude_duration_tradeoff(sys4):
    # doubling amplitude while halving duration keeps the realized map
    base = PulseSchedule((square_pulse(("g1", "e1"), math.pi / 2.0, duration=2.0),))
    squeezed = PulseSchedule((square_pulse(("g1", "e1"), math.pi / 2.0, duration=1.0),))
    u1 = realized_unitary(sys4, base).entries
    u2 = realized_unitary(sys4, squeezed).entries
    assert max_dev(u1, u2) < 1e-6


# ------------------------------------------------------------ lindblad stepper


def test_lindblad_matches_unitary_without_decay(sys4, rho_super):
    sched = memory_sequence(sys4)
    lb = propagate_lindblad(rho_super, sys4, sched, ())
    un = propagate_unitary(rho_super, sys4, sched)
    assert max_dev(lb.final_state.entries, un.final_state.entries) < 1e-8


def test_excited_population_decays_exponentially(sys4):
    gamma = 0.1
    rho0 = DensityMatrix(np.diag([0, 0, 1, 0]).astype(complex))
    traj = propagate_lindblad(
        rho0, sys4, PulseSchedule(()), (DecayChannel("e1", "g1", gamma),), t_span=(0.0, 10.0)
    )
    assert max_dev(traj.population("e1"), np.exp(-gamma * traj.times)) < 1e-6
    assert max_dev(traj.population("g1"), 1.0 - np.exp(-gamma * traj.times)) < 1e-6


def test_ground_coherence_immune_to_excited_decay(sys4):
    rho0 = DensityMatrix(RHO_GROUND)
    channels = symmetric_decay_channels(sys4, 0.25)
    traj = propagate_lindblad(rho0, sys4, PulseSchedule(()), channels, t_span=(0.0, 20.0))
    assert np.abs(traj.coherence("g1", "g2") - 0.4).max() < 1e-10


def _lindblad_reference(rho0, h_of_t, lowering, t_final):
    """Brute-force dense integration with an independent RHS assembly."""

    def rhs(t, y):
        rho = y.reshape(rho0.shape)
        h = h_of_t(t)
        out = -1j * (h @ rho - rho @ h)
        for rate, op in lowering:
            out += rate * (op @ rho @ op.conj().T - 0.5 * (op.conj().T @ op @ rho + rho @ op.conj().T @ op))
        return out.ravel()

    sol = solve_ivp(
        rhs, (0.0, t_final), rho0.ravel(), method="DOP853", rtol=1e-11, atol=1e-13,
        dense_output=False,
    )
    return sol.y[:, -1].reshape(rho0.shape)


def test_lindblad_against_brute_force_reference(sys4, rho_super):
    # one gaussian pulse plus two decay channels, checked against solve_ivp
    env = PulseEnvelope.gaussian(0.6, center=4.0, sigma=1.0)
    pulse = Pulse(env, ("g1", "e1"), carrier_phase=0.9)
    sched = PulseSchedule((pulse,))
    channels = (DecayChannel("e1", "g1", 0.15), DecayChannel("e1", "g2", 0.05))
    mine = propagate_lindblad(rho_super, sys4, sched, channels).final_state.entries

    def h_of_t(t):
        h = np.zeros((4, 4), dtype=complex)
        amp = env.value(t)
        h[0, 2] = amp * np.exp(1j * 0.9)
        h[2, 0] = amp * np.exp(-1j * 0.9)
        return h

    l1 = np.zeros((4, 4), dtype=complex)
    l1[0, 2] = 1.0  # |g1><e1|
    l2 = np.zeros((4, 4), dtype=complex)
    l2[1, 2] = 1.0  # |g2><e1|
    t0, t1 = sched.t_start, sched.t_end
    ref = _lindblad_reference(rho_super.entries.astype(complex), lambda t: h_of_t(t + t0), ((0.15, l1), (0.05, l2)), t1 - t0)
    assert max_dev(mine, ref) < 1e-7


def test_ground_coherence_reference_cross_check(sys4):
    # same invariance as above, verified against the brute-force integrator
    rho0 = DensityMatrix(RHO_GROUND)
    lows = []
    for src, dst, rate in (("e1", "g1", 0.25), ("e1", "g2", 0.25), ("e2", "g1", 0.25), ("e2", "g2", 0.25)):
        op = np.zeros((4, 4), dtype=complex)
        op[sys4.index(dst), sys4.index(src)] = 1.0
        lows.append((rate, op))
    ref = _lindblad_reference(rho0.entries.astype(complex), lambda t: np.zeros((4, 4), dtype=complex), lows, 20.0)
    assert abs(ref[0, 1] - 0.4) < 1e-9


def test_lindblad_convergence_order(sys4, rho_super):
    env = PulseEnvelope.gaussian(0.5, center=4.0, sigma=1.0)
    sched = PulseSchedule((Pulse(env, ("g1", "e1"), carrier_phase=0.3),))
    channels = (DecayChannel("e1", "g1", 0.3),)

    def final(scale):
        return propagate_lindblad(rho_super, sys4, sched, channels, step_scale=scale).final_state.entries

    reference = final(16.0)
    err_h = max_dev(final(1.0), reference)
    err_h2 = max_dev(final(2.0), reference)
    assert err_h / err_h2 >= 3.5


def test_lindblad_trajectory_validity(sys4, rho_super):
    channels = symmetric_decay_channels(sys4, 0.05)
    traj = propagate_lindblad(rho_super, sys4, memory_sequence(sys4), channels)
    assert traj.trace_error().max() < 1e-8
    assert traj.hermiticity_defect() < 1e-9
    assert traj.min_eigenvalue() > -1e-7


def test_negative_rate_rejected():
    with pytest.raises(SystemModelError):
        DecayChannel("e1", "g1", -0.1)


def test_channel_must_point_downhill(sys4, rho_super):
    with pytest.raises(SystemModelError, match="higher to lower"):
        propagate_lindblad(
            rho_super, sys4, PulseSchedule(()), (DecayChannel("g1", "e1", 0.1),), t_span=(0, 1)
        )


def test_channel_must_be_declared_transition(sys4, rho_super):
    # the ground pair has no transition, so it can't host decay either
    bad = object.__new__(DecayChannel)
    object.__setattr__(bad, "source", "g2")
    object.__setattr__(bad, "target", "g1")
    object.__setattr__(bad, "rate", 0.1)
    with pytest.raises(SystemModelError, match="not a declared transition"):
        propagate_lindblad(rho_super, sys4, PulseSchedule(()), (bad,), t_span=(0, 1))


# ---------------------------------------------------------- storage comparison


def test_storage_comparison_unitary_limit(sys4, rho_super):
    rep = storage_comparison(rho_super, sys4, (), hold_time=5.0)
    assert rep.optical_fidelity >= 1.0 - 1e-6
    assert rep.memory_fidelity >= 1.0 - 1e-6


def test_storage_comparison_strong_decay_analytic(sys4, rho_super):
    # Gamma * hold >> 1: the optically held state decays to the analytic
    # fixed point while ideal transfer keeps the memory copy intact
    gamma, hold = 0.5, 60.0
    channels = symmetric_decay_channels(sys4, gamma)
    rep = storage_comparison(rho_super, sys4, channels, hold_time=hold)
    assert rep.memory_fidelity > 1.0 - 1e-9
    # analytic decayed state: e1 population split evenly onto g1, g2;
    # optical coherence gone
    decayed = np.diag([0.2 + 0.4, 0.4, 0.0, 0.0]).astype(complex)
    expected = fidelity(DensityMatrix(decayed), rho_super)
    assert abs(rep.optical_fidelity - expected) < 1e-6


def test_memory_beats_optical_for_any_decay(sys4, rho_super):
    for gamma in (0.01, 0.05, 0.2, 1.0):
        rep = storage_comparison(
            rho_super, sys4, symmetric_decay_channels(sys4, gamma), hold_time=20.0
        )
        assert rep.memory_fidelity > rep.optical_fidelity


def test_storage_comparison_pulsed_mode_runs(sys4, rho_super):
    rep = storage_comparison(
        rho_super, sys4, symmetric_decay_channels(sys4, 0.001), hold_time=5.0, transfer="pulsed"
    )
    assert 0.0 <= rep.memory_fidelity <= 1.0
    assert rep.transfer == "pulsed"


def test_storage_comparison_rejects_bad_args(sys4, rho_super):
    with pytest.raises(ScheduleError):
        storage_comparison(rho_super, sys4, (), hold_time=0.0)
    with pytest.raises(ScheduleError):
        storage_comparison(rho_super, sys4, (), hold_time=1.0, transfer="teleport")


# ------------------------------------------------------------------- retrieval


def test_forward_then_reverse_restores_state(sys4, rho_super):
    fwd = memory_sequence(sys4)
    rev = reverse_sequence(fwd, start=fwd.t_end + 7.0)
    roundtrip = PulseSchedule(fwd.pulses + rev.pulses)
    final = propagate_unitary(rho_super, sys4, roundtrip).final_state
    assert fidelity(final, rho_super) >= 1.0 - 1e-6
