"""Python bindings for the spacecc simulator."""

from ._spacecc import (
    ConfigParse,
    DegenerateBdp,
    InvalidConfig,
    MismatchedSweep,
    TooFewPoints,
    UnknownAlgorithm,
    algorithms,
    analyze_slow_start,
    geocentric_angle,
    geometry,
    link_distance,
    normalize_config,
    pareto_mean,
    run,
)

__all__ = [
    "ConfigParse",
    "DegenerateBdp",
    "InvalidConfig",
    "MismatchedSweep",
    "TooFewPoints",
    "UnknownAlgorithm",
    "algorithms",
    "analyze_slow_start",
    "geocentric_angle",
    "geometry",
    "link_distance",
    "normalize_config",
    "pareto_mean",
    "run",
]
