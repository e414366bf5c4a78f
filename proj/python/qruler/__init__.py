"""Relational quantum ruler simulator."""

from ._core import (
    CStarResult,
    ConfigError,
    DomainError,
    FMethod,
    IonModel,
    IonPhysical,
    ModeBasis,
    NumericalError,
    RegimeError,
    ResponseProfile,
    RulerConfig,
    SwitchingProfile,
    build_dimensionless_model,
    build_ion_model,
    build_mode_basis,
    coherence_longtime,
    coherence_t,
    config_schema,
    cstar,
    preset_names,
    response_single,
    response_superposition,
    run,
)

__all__ = [
    "CStarResult",
    "ConfigError",
    "DomainError",
    "FMethod",
    "IonModel",
    "IonPhysical",
    "ModeBasis",
    "NumericalError",
    "RegimeError",
    "ResponseProfile",
    "RulerConfig",
    "SwitchingProfile",
    "build_dimensionless_model",
    "build_ion_model",
    "build_mode_basis",
    "coherence_longtime",
    "coherence_t",
    "config_schema",
    "cstar",
    "preset_names",
    "response_single",
    "response_superposition",
    "run",
]
