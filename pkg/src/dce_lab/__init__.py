"""dce-lab: a modulated-cavity photon generation analyzer.

Generates the expanded multimode equations of motion for a cavity with one
harmonically oscillating mirror, isolates stationary terms on resonance,
computes instability eigenvalues and stability boundaries, and integrates
the photon-amplitude dynamics.
"""

__version__ = "0.1.0"

from .model import (
    ModelConfig,
    PhysicalEstimate,
    coupling_strengths,
    epsilon_max,
    load_config,
    mirror_log_velocity,
    mirror_position,
    resonant_drive,
    save_config,
    shifted_frequency,
    unperturbed_frequency,
)
from .expansion import (
    Coefficient,
    EomTerm,
    OperatorRef,
    TermSystem,
    expand_frequency,
    expand_operator,
    g_coupling,
    generate_eom,
    sin_power_harmonics,
)
from .stability import (
    LinearSystem,
    StabilityResult,
    assemble_linear_system,
    build_rwa_system,
    lambda_max_closed_form,
    max_real_eigenvalue,
    resonant_block_system,
    resonant_gain,
    rwa_filter,
    stability_boundary,
    sweep_stability,
)
from .dynamics import (
    InitialState,
    Trajectory,
    fit_growth_rate,
    integrate_full,
    integrate_rwa,
)

__all__ = [name for name in dir() if not name.startswith("_")]
