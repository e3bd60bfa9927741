"""Combinatorial curvature and curvature flows for sphere packing metrics."""

from ._core import (
    ConfigError,
    DegenerateTet,
    InadmissibleInitialMetric,
    LineSearchStalled,
    NotDQE,
    ParseError,
    Triangulation,
    __version__,
    curvature,
    dqe_stability_report,
    find_dqe,
    operators,
    perturb_radii,
    prescribe_curvature,
    realizability,
    run_flow,
    solid_angles,
    spectrum,
)

__all__ = [
    "ConfigError",
    "DegenerateTet",
    "InadmissibleInitialMetric",
    "LineSearchStalled",
    "NotDQE",
    "ParseError",
    "Triangulation",
    "curvature",
    "dqe_stability_report",
    "find_dqe",
    "operators",
    "perturb_radii",
    "prescribe_curvature",
    "realizability",
    "run_flow",
    "solid_angles",
    "spectrum",
]
