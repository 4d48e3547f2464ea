"""Augmented tree tensor networks: ground-state search with a disentangler layer."""

from ._core import (
    AttnError,
    ConfigError,
    DisentanglerLayer,
    IoError,
    NumericalError,
    PlacementError,
    RunConfig,
    RunResult,
    StructureError,
    TpoOperator,
    TtnState,
    build_model,
    contract_de_layer,
    energy,
    exact_diagonalize,
    init_random_ttn,
    optimize_layer,
    place_disentanglers,
    resume,
    run,
    svd_update,
    validate_layer,
    version,
)

__all__ = [name for name in dir() if not name.startswith("_")]
