"""Decoupled second-order IMEX finite element solver for coupled Stokes-Darcy flow."""
from .assembly import Discretization, assemble_operators, build_spaces
from .mesh import build_coupled_mesh
from .mms import get_case
from .params import PhysicalParams
from .timestepper import SchemeConfig, run_transient, solve_steady

__all__ = [
    "Discretization",
    "PhysicalParams",
    "SchemeConfig",
    "assemble_operators",
    "build_coupled_mesh",
    "build_spaces",
    "get_case",
    "run_transient",
    "solve_steady",
]
__version__ = "0.1.0"
