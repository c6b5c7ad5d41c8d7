"""Qudit SWAP-gate pulse synthesis and spectator-shift fidelity analysis."""

__version__ = "0.1.0"

from .operators import (  # noqa: F401
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
from .pulses import (  # noqa: F401
    BSplineBasis,
    PulseSet,
    basis_eval,
    default_carriers,
    drive_hamiltonian,
    envelope,
    load_pulse,
    save_pulse,
)
from .propagator import (  # noqa: F401
    PropagationError,
    PropagationSettings,
    PropagatorResult,
    propagate,
    propagate_shifted,
)
from .control import (  # noqa: F401
    ObjectiveReport,
    OptimizerSettings,
    PulseShape,
    SynthesisError,
    gradient,
    guard_penalty,
    objective,
    synthesize,
    trace_fidelity,
)
from .spectator import (  # noqa: F401
    DecayReport,
    decay_report,
    gamma,
    perturbative_infidelity,
    rotating_frame_propagator,
    shifted_gate_fidelity,
    susceptibility,
    v_bar,
    v_tilde,
)
from .sweeps import (  # noqa: F401
    HeatmapSpec,
    ScalingSpec,
    SweepResult,
    fit_slope,
    rescale_collapse,
    run_heatmap,
    run_scaling,
)
from .config import RunConfig, load_config, save_config  # noqa: F401
