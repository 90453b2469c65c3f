"""Beamforming design for XL-RIS assisted near-field ISAC systems."""

from ._core import (  # noqa: F401
    BcdConfig,
    BeamformingSolution,
    ChannelSet,
    ConfigError,
    CsiErrorModel,
    CsiRecord,
    GeometryError,
    ProblemParams,
    ScenarioConfig,
    SchemaError,
    SensingReference,
    SolutionMeta,
    SolutionRecord,
    SystemConfig,
    effective_cu_channels,
    evaluate,
    initial_solution,
    make_record,
    read_dataset,
    read_solutions,
    run_bcd,
    run_cli,
    sample_channels,
    write_dataset,
    write_solutions,
)

__version__ = "0.1.0"
