"""Numerical verification of boundary (Hopf-type) estimates for the fractional a-Laplacian."""

__version__ = "0.1.0"

from .young import (Conjugate, GrowthIndices, Normalized, Power, PowerLog, Scaled,  # noqa: E402
                    SumOfPowers, YoungFunction, from_config)
from .fields import Ball, Box, Field, Grid, GridField, Interval, distance_function  # noqa: E402
from .operator import QuadratureScheme, eval_pointwise, eval_pointwise_batch  # noqa: E402
from .solver import assemble, solve, solve_torsion  # noqa: E402

__all__ = ["Ball", "Box", "Conjugate", "Field", "Grid", "GridField", "GrowthIndices",
           "Interval", "Normalized", "Power", "PowerLog", "QuadratureScheme", "Scaled",
           "SumOfPowers", "YoungFunction", "assemble", "distance_function", "eval_pointwise",
           "eval_pointwise_batch", "from_config", "solve", "solve_torsion"]
