"""B-spline control envelopes mixed with carrier waves.

A pulse is a pair of drive coefficients p(t), q(t) multiplying the Hermitian
drive operators (a + a†) and i(a - a†).  Each carrier frequency gets two
piecewise-quadratic B-spline curves (in-phase A and quadrature B) and the
carrier mixing is

    p(t) = sum_f [A_f(t) cos(W_f t) + B_f(t) sin(W_f t)]
    q(t) = sum_f [B_f(t) cos(W_f t) - A_f(t) sin(W_f t)]

i.e. a complex envelope rotated by exp(i W_f t).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline

from .operators import GateTask, lowering_operator, transition_frequency

DEGREE = 2  # piecewise-quadratic splines, C^1 envelopes

PULSE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class BSplineBasis:
    """Clamped uniform quadratic B-spline basis on [0, duration].

    ``segments`` uniform knot spans give ``segments + 2`` basis functions
    which are non-negative and sum to one everywhere on the interval.
    """

    segments: int
    duration: float

    def __post_init__(self) -> None:
        if self.segments < 1:
            raise ValueError(f"segments must be >= 1, got {self.segments}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")

    @property
    def degree(self) -> int:
        return DEGREE

    @property
    def num_functions(self) -> int:
        return self.segments + DEGREE

    @property
    def knots(self) -> np.ndarray:
        interior = np.linspace(0.0, self.duration, self.segments + 1)
        return np.concatenate([[0.0] * DEGREE, interior, [self.duration] * DEGREE])

    def design_matrix(self, t: np.ndarray) -> np.ndarray:
        """Dense (len(t), num_functions) matrix of basis values."""
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < 0.0 or t.max() > self.duration):
            raise ValueError(
                f"time outside pulse domain [0, {self.duration}]: [{t.min()}, {t.max()}]"
            )
        return BSpline.design_matrix(t, self.knots, DEGREE, extrapolate=False).toarray()


def basis_eval(basis: BSplineBasis, t: float) -> np.ndarray:
    """Values of all basis functions at a single time (non-negative, sum to 1)."""
    return basis.design_matrix(np.array([t]))[0]


@dataclass(frozen=True)
class PulseSet:
    """B-spline coefficients and carriers for one synthesized gate.

    ``coeffs`` is laid out carrier-major: for each carrier, the A-curve
    coefficients followed by the B-curve coefficients (``num_functions``
    each).  ``max_amplitude`` is the per-coefficient box bound used during
    synthesis; with clamped coefficients each quadrature obeys
    |p|, |q| <= sqrt(2) * n_carriers * max_amplitude.
    """

    basis: BSplineBasis
    carriers: tuple[float, ...]
    coeffs: np.ndarray
    max_amplitude: float

    def __post_init__(self) -> None:
        carriers = tuple(float(c) for c in self.carriers)
        object.__setattr__(self, "carriers", carriers)
        coeffs = np.array(self.coeffs, dtype=float)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        expected = 2 * len(carriers) * self.basis.num_functions
        if coeffs.shape != (expected,):
            raise ValueError(
                f"coeffs must have length {expected} "
                f"(2 x {len(carriers)} carriers x {self.basis.num_functions} "
                f"basis functions), got shape {coeffs.shape}"
            )
        if self.max_amplitude <= 0:
            raise ValueError(f"max_amplitude must be > 0, got {self.max_amplitude}")

    @property
    def num_carriers(self) -> int:
        return len(self.carriers)

    def curve_coeffs(self, carrier_index: int) -> tuple[np.ndarray, np.ndarray]:
        """(A, B) coefficient vectors of one carrier."""
        nb = self.basis.num_functions
        off = 2 * nb * carrier_index
        return self.coeffs[off : off + nb], self.coeffs[off + nb : off + 2 * nb]

    def with_coeffs(self, coeffs: np.ndarray) -> "PulseSet":
        return PulseSet(self.basis, self.carriers, coeffs, self.max_amplitude)


def envelope_arrays(pulse: PulseSet, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized drive coefficients (p(t), q(t)) at an array of times."""
    t = np.asarray(t, dtype=float)
    design = pulse.basis.design_matrix(t)
    p = np.zeros_like(t)
    q = np.zeros_like(t)
    for f in range(pulse.num_carriers):
        a_coeffs, b_coeffs = pulse.curve_coeffs(f)
        a = design @ a_coeffs
        b = design @ b_coeffs
        c, s = np.cos(pulse.carriers[f] * t), np.sin(pulse.carriers[f] * t)
        p += a * c + b * s
        q += b * c - a * s
    return p, q


def envelope(pulse: PulseSet, t: float) -> tuple[float, float]:
    """Drive coefficients (p, q) in rad/ns at time t."""
    p, q = envelope_arrays(pulse, np.array([t]))
    return float(p[0]), float(q[0])


def drive_operators(n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    """The Hermitian drive operators (a + a†, i(a - a†)) on N levels."""
    a = lowering_operator(n_levels)
    return a + a.T, 1j * (a - a.T)


def drive_hamiltonian(pulse: PulseSet, t: float, n_levels: int) -> np.ndarray:
    """Drive term p(t)(a + a†) + q(t) i(a - a†); Hermitian by construction."""
    x_op, y_op = drive_operators(n_levels)
    p, q = envelope(pulse, t)
    return p * x_op + q * y_op


def default_carriers(task: GateTask) -> list[float]:
    """Adjacent-level transition frequencies inside the essential subspace.

    E_k - E_{k+1} for k = 0 .. d-2, from the static Hamiltonian; duplicates
    removed (first occurrence kept).  The orientation matters: with the
    envelope mixing above, a carrier W turns the complex drive p + iq into
    (A + iB) exp(-i W t), and the interaction-picture lowering operator
    rotates its k <-> k+1 element by exp(-i (E_k - E_{k+1}) t), so only
    W = E_k - E_{k+1} addresses that transition resonantly.
    """
    spec = task.oscillator
    freqs: list[float] = []
    for k in range(spec.essential_levels - 1):
        f = transition_frequency(k, k + 1, spec)
        if f not in freqs:
            freqs.append(f)
    return freqs


def max_carrier_frequency(pulse: PulseSet) -> float:
    """Largest carrier magnitude (rad/ns); 0 for an empty carrier set."""
    return max((abs(c) for c in pulse.carriers), default=0.0)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

TWO_PI = 2.0 * np.pi


def pulse_to_dict(pulse: PulseSet, extra: dict | None = None) -> dict:
    """JSON-ready document with fixed field names (frequencies in GHz)."""
    doc = {
        "format_version": PULSE_FORMAT_VERSION,
        "basis": {
            "segments": pulse.basis.segments,
            "duration_ns": pulse.basis.duration,
        },
        "carriers_ghz": [c / TWO_PI for c in pulse.carriers],
        "coeffs": pulse.coeffs.tolist(),
        "max_amplitude_ghz": pulse.max_amplitude / TWO_PI,
    }
    if extra:
        doc.update(extra)
    return doc


def pulse_from_dict(doc: dict) -> PulseSet:
    version = doc.get("format_version")
    if version != PULSE_FORMAT_VERSION:
        raise ValueError(
            f"unsupported pulse format_version {version!r}, expected {PULSE_FORMAT_VERSION}"
        )
    basis = BSplineBasis(
        segments=int(doc["basis"]["segments"]),
        duration=float(doc["basis"]["duration_ns"]),
    )
    return PulseSet(
        basis=basis,
        carriers=tuple(TWO_PI * float(c) for c in doc["carriers_ghz"]),
        coeffs=np.array(doc["coeffs"], dtype=float),
        max_amplitude=TWO_PI * float(doc["max_amplitude_ghz"]),
    )


def save_pulse(pulse: PulseSet, path: str | Path, extra: dict | None = None) -> None:
    Path(path).write_text(json.dumps(pulse_to_dict(pulse, extra), indent=2) + "\n")


def load_pulse(path: str | Path) -> tuple[PulseSet, dict]:
    """Read a pulse file; returns the pulse and the full document."""
    doc = json.loads(Path(path).read_text())
    return pulse_from_dict(doc), doc
