"""Exact normal-form and instability analysis of the pendulum swing-up Hamiltonian.

Modules are layered bottom-up: :mod:`exactalg` (Q(sqrt 2) scalars and
truncated jets), :mod:`model`, :mod:`symplin`, :mod:`scaling`,
:mod:`poisson`, :mod:`lie`, :mod:`chetayev`, :mod:`sim` and :mod:`cli`.
"""

from .exactalg import Jet, Scalar, SQRT2
from .model import NORMALIZED, PendulumParams, build_hamiltonian

__all__ = ["Jet", "Scalar", "SQRT2", "NORMALIZED", "PendulumParams", "build_hamiltonian"]
__version__ = "0.1.0"
