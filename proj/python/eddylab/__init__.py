# Copyright eddylab contributors. All Rights Reserved.
# SPDX-License-Identifier: Apache-2.0

"""Staggered-grid studies of the eddy-current limit of Maxwell's equations."""

from ._eddylab import (
    DimensionError,
    DocumentError,
    DomainError,
    Grid,
    ModelInvalidError,
    ParseError,
    Scenario,
    SolverError,
    ValidationError,
    build_grid,
    discrete_rho,
    fit_line,
    study_names,
)

__all__ = [
    "DimensionError",
    "DocumentError",
    "DomainError",
    "Grid",
    "ModelInvalidError",
    "ParseError",
    "Scenario",
    "SolverError",
    "ValidationError",
    "build_grid",
    "discrete_rho",
    "fit_line",
    "study_names",
]
