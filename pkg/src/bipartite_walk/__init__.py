"""State transfer by discrete-time coined quantum walks on complete bipartite graphs."""

from .analysis import (
    FidelityCurve,
    Source,
    SweepGrid,
    VerificationReport,
    VerifyLimits,
    curve,
    find_peak,
    scan_peak,
    sweep_fmax,
    verify,
)
from .dense import DenseUnitary, build_dense, matrix_power_fidelity
from .exceptions import (
    ConfigurationError,
    DegenerateBasisError,
    ParityError,
    SizeGuardError,
    UnsupportedSourceError,
)
from .reduced import (
    ReducedModel,
    SpectralModel,
    TransferReport,
    build_reduced,
    build_reduced_opposite,
    build_reduced_same,
    build_reduced_same_degenerate,
    fidelity_closed_form,
    fmax_opposite,
    spectral_opposite,
    transfer_time,
)
from .walk import (
    Layout,
    StepOperator,
    WalkParams,
    WalkState,
    apply_grover,
    evolve,
    fidelity,
    initial_state,
    step,
    target_state,
)

__version__ = "0.1.0"
