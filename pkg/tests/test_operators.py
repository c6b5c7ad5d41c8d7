"""Operator and Hamiltonian construction tests."""

import numpy as np
import pytest

from quditswap.operators import (
    GateTask,
    OscillatorSpec,
    SpectatorConfig,
    epsilon_shift,
    h0,
    h_eff,
    lowering_operator,
    number_operator,
    shift_operator,
    swap_target,
    transition_frequency,
)

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# elementary operators
# ---------------------------------------------------------------------------


def test_number_operator_values():
    assert np.array_equal(number_operator(1), [[0.0]])
    assert np.array_equal(number_operator(3), np.diag([0.0, 1.0, 2.0]))
    assert np.array_equal(number_operator(8), np.diag(np.arange(8.0)))


def test_lowering_operator_entries():
    assert np.array_equal(lowering_operator(2), [[0.0, 1.0], [0.0, 0.0]])
    assert lowering_operator(3)[1, 2] == pytest.approx(np.sqrt(2.0))
    with pytest.raises(ValueError):
        lowering_operator(1)


def test_lowering_operator_number_identity():
    # a†a reproduces the number operator exactly on the truncated space;
    # the truncation artifact lives in a a†, whose last diagonal entry is 0
    # instead of N.
    a = lowering_operator(5)
    assert np.allclose(a.T @ a, number_operator(5), atol=1e-14)
    assert np.allclose(a @ a.T, np.diag([1.0, 2.0, 3.0, 4.0, 0.0]), atol=1e-14)


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------


def test_h0_diagonal_values():
    spec = OscillatorSpec(essential_levels=4, guard_levels=1, self_kerr=TWO_PI * 0.22)
    diag = np.diag(h0(spec))
    assert diag[0] == 0.0 and diag[1] == 0.0
    assert diag[2] == pytest.approx(-TWO_PI * 0.22, rel=1e-15)
    spec1 = OscillatorSpec(essential_levels=5, guard_levels=0, self_kerr=1.0)
    assert np.diag(h0(spec1))[4] == pytest.approx(-6.0)


def test_shift_operator():
    assert np.array_equal(shift_operator(2), np.diag([0.0, -1.0]))
    assert np.array_equal(shift_operator(5), np.diag([0.0, -1.0, -2.0, -3.0, -4.0]))
    assert np.trace(shift_operator(5)) == -10.0


def test_epsilon_shift():
    assert epsilon_shift(SpectatorConfig()) == 0.0
    assert epsilon_shift(SpectatorConfig(((0.5, 0), (0.5, 0)))) == 0.0
    assert epsilon_shift(SpectatorConfig(((0.1, 2), (0.01, 3)))) == pytest.approx(0.23)


def test_spectator_config_validation():
    with pytest.raises(ValueError):
        SpectatorConfig(((-0.1, 1),))
    with pytest.raises(ValueError):
        SpectatorConfig(((0.1, -1),))


def test_h_eff_limits():
    spec = OscillatorSpec(essential_levels=4, guard_levels=1, self_kerr=1.0)
    assert np.array_equal(h_eff(spec, 0.0), h0(spec))
    eps = 0.01
    diag = np.diag(h_eff(spec, eps))
    assert diag[1] == pytest.approx(-eps)
    assert diag[3] == pytest.approx(-3.0 - 0.03)


def test_h_eff_depends_only_on_epsilon():
    spec = OscillatorSpec(essential_levels=3, guard_levels=1, self_kerr=1.0)
    a = SpectatorConfig(((0.25, 1), (0.5, 1)))
    b = SpectatorConfig(((0.75, 1),))
    assert epsilon_shift(a) == epsilon_shift(b)
    assert np.array_equal(h_eff(spec, epsilon_shift(a)), h_eff(spec, epsilon_shift(b)))


def test_h0_commutes_with_shift():
    spec = OscillatorSpec(essential_levels=5, guard_levels=1)
    h = h0(spec)
    v = shift_operator(spec.total_levels)
    assert np.max(np.abs(h @ v - v @ h)) == 0.0


# ---------------------------------------------------------------------------
# SWAP target
# ---------------------------------------------------------------------------


def test_swap_target_pauli_x():
    spec = OscillatorSpec(essential_levels=2, guard_levels=0, self_kerr=1.0)
    u = swap_target(GateTask(0, 1, 1.0, spec))
    assert np.array_equal(u, [[0.0, 1.0], [1.0, 0.0]])


def test_swap_target_involutory_unitary_hermitian():
    spec = OscillatorSpec(essential_levels=5, guard_levels=1)
    u = swap_target(GateTask(0, 4, 1.0, spec))
    assert np.array_equal(u @ u, np.eye(6))
    assert np.array_equal(u, u.T)
    assert np.max(np.abs(u @ u.T - np.eye(6))) == 0.0


def test_swap_target_columns():
    spec = OscillatorSpec(essential_levels=4, guard_levels=1)
    u = swap_target(GateTask(0, 3, 1.0, spec))
    eye = np.eye(5)
    assert np.array_equal(u[:, 3], eye[:, 0])
    assert np.array_equal(u[:, 0], eye[:, 3])
    for k in (1, 2, 4):
        assert np.array_equal(u[:, k], eye[:, k])


def test_gate_task_validation():
    spec = OscillatorSpec(essential_levels=4, guard_levels=1)
    with pytest.raises(ValueError):
        GateTask(2, 2, 1.0, spec)
    with pytest.raises(ValueError):
        GateTask(1, 4, 1.0, spec)  # j beyond essential subspace
    with pytest.raises(ValueError):
        GateTask(0, 3, -1.0, spec)


# ---------------------------------------------------------------------------
# transition frequencies
# ---------------------------------------------------------------------------


def test_transition_frequency_values():
    spec = OscillatorSpec(essential_levels=5, guard_levels=0, self_kerr=1.0)
    assert transition_frequency(1, 0, spec) == 0.0
    assert transition_frequency(2, 1, spec) == pytest.approx(-1.0)
    assert transition_frequency(4, 0, spec) == pytest.approx(-6.0)


def test_transition_frequency_antisymmetric():
    spec = OscillatorSpec(essential_levels=6, guard_levels=1)
    for i in range(7):
        for j in range(7):
            assert transition_frequency(i, j, spec) == -transition_frequency(j, i, spec)


def test_oscillator_spec_validation():
    with pytest.raises(ValueError):
        OscillatorSpec(essential_levels=1)
    with pytest.raises(ValueError):
        OscillatorSpec(essential_levels=3, guard_levels=-1)
    with pytest.raises(ValueError):
        OscillatorSpec(essential_levels=3, self_kerr=0.0)
