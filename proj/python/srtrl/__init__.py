"""Online recurrent learning engines and experiment harness."""

from ._core import (
    ConfigError,
    DivergenceError,
    Engine,
    ImmediateDerivs,
    IngestionError,
    JacobianState,
    PropagationMask,
    RnnParams,
    UndefinedGapError,
    bci_recovery,
    build_report,
    format_report,
    gap_recovery,
    immediate_derivs,
    make_task,
    masked_contract,
    read_jacobian,
    rtrl_step,
    run_experiment,
    seed_dispersion,
    select_mask,
    spectral_analysis,
    traces_step,
    validate_config,
    vector_cosine,
    write_jacobian,
)

__all__ = [name for name in dir() if not name.startswith("_")]
