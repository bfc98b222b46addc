"""Optimality Hamiltonians of the pendulum swing-up problem as exact jets.

Two charts are supported:

* ``pendant`` -- expansion about the hanging equilibrium after the shift
  ``y1 = x1 - pi``; this is where the instability analysis happens.
* ``upright`` -- expansion about ``x = 0`` in the original chart, only used
  for the eigenvalue comparison between the two equilibria.

The normalized Hamiltonian is taken as a definition (coefficients 1/3, 1/2,
1/18) rather than derived from the physical one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactalg import DEFAULT_MAX_DEGREE, Jet, Y_VARS, jet_compose_elem

__all__ = ["PendulumParams", "build_hamiltonian", "eval_hamiltonian_closed_form", "NORMALIZED"]

THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class PendulumParams:
    """Physical parameters; ``normalized=True`` selects the normalized Hamiltonian."""

    m: Fraction = Fraction(1)
    l: Fraction = Fraction(1)
    g: Fraction = Fraction(1)
    normalized: bool = False

    def __post_init__(self):
        for name in ("m", "l", "g"):
            v = Fraction(getattr(self, name))
            if v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
            object.__setattr__(self, name, v)


NORMALIZED = PendulumParams(normalized=True)


def _coefficients(params: PendulumParams):
    """(drift, centrifugal, control) coefficients so that

    H = p1*y2 -+ p2*(drift*sin y1 + centrifugal*y2^2*sin 2y1)/(sin^2 y1 + 1/3)
             - control * p2^2 cos^2 y1 / (sin^2 y1 + 1/3)^2
    """
    if params.normalized:
        return THIRD, Fraction(1, 2), Fraction(1, 18)
    m, l, g = params.m, params.l, params.g
    return g / l, Fraction(1, 2), 1 / (4 * l * l * m * m)


def build_hamiltonian(
    params: PendulumParams = NORMALIZED,
    max_degree: int = DEFAULT_MAX_DEGREE,
    equilibrium: str = "pendant",
) -> Jet:
    """Taylor expansion of the optimality Hamiltonian in ``(y1, y2, p1, p2)``.

    Parameters
    ----------
    params : PendulumParams
        Physical or normalized parameters.
    max_degree : int
        Even truncation order (>= 2).
    equilibrium : {"pendant", "upright"}
        Expansion point. ``upright`` uses the unshifted chart ``x1 = theta``.
    """
    if max_degree < 2 or max_degree % 2:
        raise ValueError(f"max_degree must be even and >= 2, got {max_degree}")
    if equilibrium not in ("pendant", "upright"):
        raise ValueError(f"unknown equilibrium {equilibrium!r}")
    y1, y2, p1, p2 = Jet.gens(max_degree, Y_VARS)
    drift, centrifugal, control = _coefficients(params)

    s = jet_compose_elem("sin", y1)
    s2 = jet_compose_elem("sin", y1 * 2)
    c = jet_compose_elem("cos", y1)
    inv_d = jet_compose_elem("recip", s * s + THIRD)

    if equilibrium == "pendant":
        # sin(x1) = -sin(y1), sin(2 x1) = sin(2 y1)
        numer = s * drift + y2 * y2 * s2 * centrifugal
        drift_term = -(p2 * numer * inv_d)
    else:
        numer = s * drift - y2 * y2 * s2 * centrifugal
        drift_term = p2 * numer * inv_d
    control_term = -(p2 * p2 * c * c * inv_d * inv_d * control)
    return p1 * y2 + drift_term + control_term


def eval_hamiltonian_closed_form(
    params: PendulumParams, point: Sequence[float], equilibrium: str = "pendant"
) -> float:
    """Floating-point value of the closed-form Hamiltonian at ``(y1, y2, p1, p2)``."""
    y1, y2, p1, p2 = (float(v) for v in point)
    drift, centrifugal, control = (float(v) for v in _coefficients(params))
    s = math.sin(y1)
    d = s * s + 1.0 / 3.0
    sign = -1.0 if equilibrium == "pendant" else 1.0
    numer = drift * s - sign * centrifugal * y2 * y2 * math.sin(2 * y1)
    return p1 * y2 + sign * p2 * numer / d - control * p2 * p2 * math.cos(y1) ** 2 / (d * d)
