# File formats
from .files import (
    PotentialEntry,
    PotentialFile,
    InlineSFT,
    SuspensionFile,
    CertificateOut,
    ResultFile,
    CheckOut,
    ValidationReport,
    SelftestRecord,
)

# Command configs
from .experiment import (
    ExperimentConfig,
    MapOptimizeConfig,
    FlowOptimizeConfig,
    ReduceConfig,
    LorenzConfig,
    SelftestConfig,
    VALID_COMMANDS,
    validate_command_config,
)

__all__ = [
    "PotentialEntry",
    "PotentialFile",
    "InlineSFT",
    "SuspensionFile",
    "CertificateOut",
    "ResultFile",
    "CheckOut",
    "ValidationReport",
    "SelftestRecord",
    "ExperimentConfig",
    "MapOptimizeConfig",
    "FlowOptimizeConfig",
    "ReduceConfig",
    "LorenzConfig",
    "SelftestConfig",
    "VALID_COMMANDS",
    "validate_command_config",
]
