"""Operators and Hamiltonians of a single Kerr-nonlinear oscillator mode.

Everything is expressed with hbar = 1 in the frame rotating at the mode
frequency, so Hamiltonians carry angular-frequency units (rad/ns) and times
are in ns.  The computational (essential) levels are the lowest Fock states;
guard levels sit directly above them and participate in the dynamics but are
not part of any gate target.

Spectator modes never appear as tensor factors.  For Fock-state spectators
the whole effect of the cross-Kerr couplings collapses to a single scalar
frequency shift ``eps`` acting through the diagonal shift operator ``-n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OscillatorSpec:
    """Target oscillator mode.

    Parameters
    ----------
    essential_levels : int
        Dimension ``d`` of the computational subspace (>= 2).
    guard_levels : int
        Extra simulated levels above the essential subspace.
    self_kerr : float
        Self-Kerr coefficient (rad/ns), > 0.
    rotation_freq : float
        Rotating-frame frequency (rad/ns).  Bookkeeping only; the dynamics
        are independent of this global frame choice.
    """

    essential_levels: int
    guard_levels: int = 1
    self_kerr: float = TWO_PI * 0.22
    rotation_freq: float = TWO_PI * 4.8

    def __post_init__(self) -> None:
        if self.essential_levels < 2:
            raise ValueError(f"essential_levels must be >= 2, got {self.essential_levels}")
        if self.guard_levels < 0:
            raise ValueError(f"guard_levels must be >= 0, got {self.guard_levels}")
        if self.self_kerr <= 0:
            raise ValueError(f"self_kerr must be > 0, got {self.self_kerr}")

    @property
    def total_levels(self) -> int:
        """Number of simulated levels N = essential + guard."""
        return self.essential_levels + self.guard_levels


@dataclass(frozen=True)
class SpectatorConfig:
    """Cross-Kerr strengths and Fock occupations of the spectator modes.

    Downstream code must consume this only through :func:`epsilon_shift`;
    two configs with equal total shift are physically indistinguishable.
    """

    entries: tuple[tuple[float, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple((float(x), int(n)) for x, n in self.entries))
        for cross_kerr, occupation in self.entries:
            if cross_kerr < 0:
                raise ValueError(f"cross_kerr must be >= 0, got {cross_kerr}")
            if occupation < 0:
                raise ValueError(f"occupation must be >= 0, got {occupation}")


@dataclass(frozen=True)
class GateTask:
    """A SWAP gate between two essential levels of one oscillator.

    ``swap_from < swap_to`` must both lie inside the essential subspace and
    ``duration`` (ns) must be positive.
    """

    swap_from: int
    swap_to: int
    duration: float
    oscillator: OscillatorSpec

    def __post_init__(self) -> None:
        i, j, d = self.swap_from, self.swap_to, self.oscillator.essential_levels
        if i == j:
            raise ValueError("degenerate task: swap_from == swap_to")
        if not (0 <= i < j < d):
            raise ValueError(f"need 0 <= i < j < essential_levels, got i={i}, j={j}, d={d}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")

    @property
    def label(self) -> str:
        return f"swap{self.swap_from}{self.swap_to}"


def number_operator(n_levels: int) -> np.ndarray:
    """Fock number operator, diag(0, 1, ..., N-1)."""
    if n_levels < 1:
        raise ValueError(f"need at least one level, got {n_levels}")
    return np.diag(np.arange(n_levels, dtype=float))


def lowering_operator(n_levels: int) -> np.ndarray:
    """Bosonic lowering operator truncated to N levels: (k, k+1) entry sqrt(k+1)."""
    if n_levels < 2:
        raise ValueError(f"lowering operator needs >= 2 levels, got {n_levels}")
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), k=1)


def h0(spec: OscillatorSpec) -> np.ndarray:
    """Static Kerr Hamiltonian -(xi/2)(n^2 - n), diagonal, rad/ns."""
    k = np.arange(spec.total_levels, dtype=float)
    return np.diag(-0.5 * spec.self_kerr * (k * k - k))


def shift_operator(n_levels: int) -> np.ndarray:
    """Spectator-induced shift operator, -n."""
    return -number_operator(n_levels)


def epsilon_shift(cfg: SpectatorConfig) -> float:
    """Total frequency shift (rad/ns) induced on the target mode.

    Sum of cross_kerr * occupation over spectators; 0 for no spectators.
    """
    return float(sum(cross_kerr * occupation for cross_kerr, occupation in cfg.entries))


def h_eff(spec: OscillatorSpec, eps: float) -> np.ndarray:
    """Effective static Hamiltonian h0 + eps * shift, diagonal, rad/ns."""
    if eps == 0.0:
        return h0(spec)
    return h0(spec) + eps * shift_operator(spec.total_levels)


def swap_target(task: GateTask) -> np.ndarray:
    """Target unitary exchanging |i> and |j>, identity elsewhere (guards included)."""
    n = task.oscillator.total_levels
    i, j = task.swap_from, task.swap_to
    u = np.eye(n)
    u[i, i] = u[j, j] = 0.0
    u[i, j] = u[j, i] = 1.0
    return u


def transition_frequency(i: int, j: int, spec: OscillatorSpec) -> float:
    """Transition frequency E_i - E_j (rad/ns) from the h0 eigenvalues.

    Derived from the simulated static Hamiltonian itself so that carrier
    frequencies are self-consistent with the dynamics.
    """
    n = spec.total_levels
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"level indices must lie in [0, {n}), got i={i}, j={j}")
    energies = np.diag(h0(spec))
    return float(energies[i] - energies[j])
