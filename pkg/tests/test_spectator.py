"""Fidelity decay analysis: rotating frame, time averages, predictor."""

import numpy as np
import pytest

from quditswap.operators import GateTask, OscillatorSpec, number_operator, shift_operator
from quditswap.propagator import PropagationSettings, propagate_shifted
from quditswap.pulses import BSplineBasis, PulseSet
from quditswap.spectator import (
    decay_report,
    gamma,
    perturbative_infidelity,
    rotating_frame_propagator,
    shifted_gate_fidelity,
    susceptibility,
    v_bar,
    v_tilde,
)

SPEC = OscillatorSpec(essential_levels=3, guard_levels=1, self_kerr=1.0)
TASK = GateTask(0, 2, 20.0, SPEC)
FAST = PropagationSettings(steps_per_ns=50)


def random_pulse(seed=1, scale=0.15):
    basis = BSplineBasis(6, TASK.duration)
    carriers = (0.0, 1.0)
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-scale, scale, 2 * len(carriers) * basis.num_functions)
    return PulseSet(basis, carriers, coeffs, 1.0)


def zero_pulse():
    basis = BSplineBasis(6, TASK.duration)
    return PulseSet(basis, (0.0,), np.zeros(2 * basis.num_functions), 1.0)


# ---------------------------------------------------------------------------
# rotating frame
# ---------------------------------------------------------------------------


def test_rotating_frame_identity():
    rng = np.random.default_rng(2)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u, _ = np.linalg.qr(m)
    assert np.max(np.abs(rotating_frame_propagator(u, u) - np.eye(4))) < 1e-14


def test_rotating_frame_unitary_product():
    rng = np.random.default_rng(3)
    u1, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    u2, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    r = rotating_frame_propagator(u1, u2)
    assert np.max(np.abs(r.conj().T @ r - np.eye(5))) < 1e-12


def test_rotating_frame_phase_factorization():
    rng = np.random.default_rng(4)
    u, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    phi = 0.83
    r = rotating_frame_propagator(u, np.exp(1j * phi) * u)
    assert np.max(np.abs(r - np.exp(1j * phi) * np.eye(3))) < 1e-13


def test_rotating_frame_shape_mismatch():
    with pytest.raises(ValueError):
        rotating_frame_propagator(np.eye(3), np.eye(4))


# ---------------------------------------------------------------------------
# shifted fidelity
# ---------------------------------------------------------------------------


def test_fidelity_zero_shift_is_one():
    pulse = random_pulse()
    assert shifted_gate_fidelity(pulse, TASK, 0.0, FAST) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_epsilon_equivalence_bitwise():
    # two spectator configurations with equal total shift give identical results
    from quditswap.operators import SpectatorConfig, epsilon_shift

    pulse = random_pulse()
    eps_a = epsilon_shift(SpectatorConfig(((0.25e-3, 1), (0.5e-3, 1))))
    eps_b = epsilon_shift(SpectatorConfig(((0.75e-3, 1),)))
    assert eps_a == eps_b
    fa = shifted_gate_fidelity(pulse, TASK, eps_a, FAST)
    fb = shifted_gate_fidelity(pulse, TASK, eps_b, FAST)
    assert fa == fb


def test_fidelity_decreases_with_shift():
    pulse = random_pulse()
    f_small = shifted_gate_fidelity(pulse, TASK, 1e-4, FAST)
    f_large = shifted_gate_fidelity(pulse, TASK, 3e-2, FAST)
    assert f_large < f_small <= 1.0


# ---------------------------------------------------------------------------
# conjugated shift operator and its averages
# ---------------------------------------------------------------------------


def u0_checkpoints(pulse, k=401):
    return propagate_shifted(SPEC, 0.0, pulse, FAST, n_checkpoints=k).checkpoints


def test_v_tilde_initial_and_trace():
    series = v_tilde(u0_checkpoints(random_pulse()), SPEC.total_levels)
    v_op = shift_operator(SPEC.total_levels)
    t0, first = series[0]
    assert t0 == 0.0
    assert np.max(np.abs(first - v_op)) < 1e-13
    for _, m in series[:: len(series) // 7]:
        assert np.trace(m) == pytest.approx(np.trace(v_op), abs=1e-10)
        assert np.max(np.abs(m - m.conj().T)) < 1e-12


def test_v_tilde_zero_pulse_constant():
    series = v_tilde(u0_checkpoints(zero_pulse()), SPEC.total_levels)
    v_op = shift_operator(SPEC.total_levels)
    for _, m in series:
        assert np.max(np.abs(m - v_op)) < 1e-12


def test_v_bar_constant_series():
    v_op = shift_operator(4)
    series = [(float(t), v_op) for t in np.linspace(0, 3.0, 11)]
    assert np.max(np.abs(v_bar(series, 3.0) - v_op)) < 1e-14


def test_v_bar_trace_preserved():
    pulse = random_pulse()
    vb = v_bar(v_tilde(u0_checkpoints(pulse), SPEC.total_levels), TASK.duration)
    n = SPEC.total_levels
    assert np.trace(vb) == pytest.approx(-n * (n - 1) / 2, abs=1e-9)
    assert np.max(np.abs(vb - vb.conj().T)) < 1e-8


def test_v_bar_quadrature_refinement():
    # smooth periodic integrand: doubling the checkpoint density moves the
    # average by less than 1e-8
    tau, omega = 4.0, 2.0 * np.pi / 4.0
    w = np.array([[0.0, 1.0], [1.0, 0.0]])

    def series(k):
        times = np.linspace(0.0, tau, k)
        return [(float(t), np.sin(omega * t) * w + np.diag([0.0, -1.0])) for t in times]

    coarse = v_bar(series(2001), tau)
    fine = v_bar(series(4001), tau)
    assert np.max(np.abs(coarse - fine)) < 1e-8


# ---------------------------------------------------------------------------
# gamma
# ---------------------------------------------------------------------------


def test_gamma_commuting_series_zero():
    series = v_tilde(u0_checkpoints(zero_pulse()), SPEC.total_levels)
    g = gamma(series, TASK.duration)
    assert np.max(np.abs(g)) < 1e-9


def test_gamma_piecewise_closed_form():
    # V~ = A on the first half, B on the second: Gamma = i (tau^2/4) [A, B]
    rng = np.random.default_rng(6)
    a = rng.normal(size=(3, 3))
    a = a + a.T
    b = rng.normal(size=(3, 3))
    b = b + b.T
    tau, k = 2.0, 4001
    times = np.linspace(0.0, tau, k)
    series = [(float(t), a if t < tau / 2 else b) for t in times]
    expected = 1j * (tau**2 / 4.0) * (a @ b - b @ a)
    got = gamma(series, tau)
    scale = np.max(np.abs(expected))
    assert np.max(np.abs(got - expected)) < 2e-3 * scale


def test_gamma_refinement_and_hermiticity():
    tau, omega = 3.0, 2.0 * np.pi / 6.0
    wx = np.array([[0.0, 1.0], [1.0, 0.0]])
    wz = np.diag([1.0, -1.0])

    def series(k):
        times = np.linspace(0.0, tau, k)
        return [
            (float(t), np.sin(omega * t) * wx + np.cos(omega * t) * wz) for t in times
        ]

    coarse = gamma(series(8001), tau)
    fine = gamma(series(16001), tau)
    assert np.max(np.abs(coarse - fine)) < 1e-6
    assert np.max(np.abs(coarse - coarse.conj().T)) < 1e-12


def test_gamma_needs_checkpoints():
    with pytest.raises(ValueError):
        gamma([(0.0, np.eye(2))], 1.0)


# ---------------------------------------------------------------------------
# perturbative predictor
# ---------------------------------------------------------------------------


def test_predictor_zero_shift():
    vb = shift_operator(4).astype(complex)
    assert perturbative_infidelity(vb, 5.0, 3, 0.0) == 0.0


def test_predictor_two_level_number_operator():
    # Vb = -n on a two-level essential block: the mixed-state variance of
    # diag(0, -1) is 1/2 - 1/4 = 1/4, so chi = tau^2 / 4
    vb = -number_operator(2).astype(complex)
    assert susceptibility(vb, 1.0, 2) == pytest.approx(0.25)
    eps = 3e-3
    assert perturbative_infidelity(vb, 1.0, 2, eps) == pytest.approx(0.25 * eps * eps)


def test_predictor_scalar_shift_invisible():
    # a shift proportional to the identity is pure global phase
    vb = (-2.7 * np.eye(5)).astype(complex)
    assert susceptibility(vb, 7.0, 4) == pytest.approx(0.0, abs=1e-12)


def test_predictor_matches_simulation_toy_gate():
    from quditswap.control import OptimizerSettings, synthesize

    pulse, _ = synthesize(
        TASK, OptimizerSettings(max_iterations=60, seed=3), propagation=FAST
    )
    report = decay_report(pulse, TASK, 1e-4, FAST, n_checkpoints=1000)
    assert report.simulated_infidelity > 0.0
    assert report.predicted_infidelity == pytest.approx(
        report.simulated_infidelity, rel=0.2
    )
    assert report.predicted_infidelity == pytest.approx(
        report.susceptibility * (1e-4 * SPEC.self_kerr) ** 2, rel=1e-12
    )


def test_negative_shift_same_quadratic_magnitude():
    pulse = random_pulse()
    eps = 1e-4 * SPEC.self_kerr
    plus = 1.0 - shifted_gate_fidelity(pulse, TASK, eps, FAST)
    minus = 1.0 - shifted_gate_fidelity(pulse, TASK, -eps, FAST)
    assert minus == pytest.approx(plus, rel=0.05)
