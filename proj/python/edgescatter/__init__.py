"""Edge-channel scattering and interface conductivity for Dirac domain walls."""

from ._edgescatter import (
    Basis,
    Bump,
    Channel,
    ChannelSet,
    ConductivityNode,
    ConductivityReport,
    DecayCertificate,
    Error,
    Potential,
    ScatteringMatrix,
    SolverParams,
    channels_at,
    conductivity,
    critical_set,
    current_matrix,
    gram_matrix,
    ladder_residual,
    make_basis,
    potential,
    potential_from_json,
    run_task,
    scatter_at,
    verify_decay,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
