"""Numerical toolkit for the bi-Hamiltonian structure of the spin Sutherland hierarchy.

Matrix factorizations of GL(n, C), the Poisson brackets on the Heisenberg
double, on T*U(n) and on its reduction to T^n_reg x Herm(n), the associated
flows and coordinates, and a harness of seeded verification suites.
"""

__version__ = "0.1.0"

from .brackets import bracket, hamiltonian_vector_field, jacobi_residual, pencil
from .calculus import GradientSet, grad, grad_exact, grad_fd
from .coords import rs_from, rs_to, sutherland_from, sutherland_to
from .dynamics import conserved_suite, explicit_flow, hamiltonian_Hk, integrate, reduced_field
from .factorization import m1, m1_inv, m2, m2_inv, quasi_adjoint, split
from .observables import ObservableExpr, evaluate, parse_observable
from .points import ModelPoint1, ModelPoint2, PhasePoint, ReducedPoint, RSCoords, SutherlandCoords, Torus

__all__ = [
    "GradientSet",
    "ModelPoint1",
    "ModelPoint2",
    "ObservableExpr",
    "PhasePoint",
    "RSCoords",
    "ReducedPoint",
    "SutherlandCoords",
    "Torus",
    "bracket",
    "conserved_suite",
    "evaluate",
    "explicit_flow",
    "grad",
    "grad_exact",
    "grad_fd",
    "hamiltonian_Hk",
    "hamiltonian_vector_field",
    "integrate",
    "jacobi_residual",
    "m1",
    "m1_inv",
    "m2",
    "m2_inv",
    "parse_observable",
    "pencil",
    "quasi_adjoint",
    "reduced_field",
    "rs_from",
    "rs_to",
    "split",
    "sutherland_from",
    "sutherland_to",
]
