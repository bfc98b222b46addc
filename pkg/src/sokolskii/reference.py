"""Hand-entered reference values for the pendant-equilibrium analysis.

Nothing here is computed by the pipeline; these literals are what the
pipeline output is compared against (golden values). Where the derivation
chain and the reference disagree the difference is documented next to the
value.
"""
from __future__ import annotations

import math
from fractions import Fraction as F

from .exactalg import Jet, Scalar, Z_VARS
from .poisson import PoissonSeries
from .scaling import GradedSeries

__all__ = [
    "ALPHA",
    "quadratic_z",
    "quartic_z",
    "QUARTIC_EXTRA_TERM",
    "scaled_z",
    "h_tilde",
    "sokolskii_hamiltonian",
    "normal_form_hamiltonian",
    "generator_w2",
    "instability_hamiltonian_z",
    "instability_field",
    "vdot_parts",
    "table1_eigenvalues",
]

ALPHA = F(13, 32)

# exponents over (z1, z2, z3, z4)
_QUARTIC = {
    (1, 0, 0, 3): F(19, 12),
    (1, 0, 2, 1): F(-3, 2),
    (1, 1, 1, 1): F(3, 2),
    (2, 0, 2, 0): F(3, 4),
    (2, 1, 1, 0): F(-3, 4),
    (2, 2, 0, 0): F(3, 16),
    (3, 0, 0, 1): F(-37, 16),
    (2, 0, 0, 2): F(9, 8),
    (4, 0, 0, 0): F(65, 96),
}
# the exact degree-4 image also carries this monomial; its blow-up weight is
# 4, so it never reaches the eps^2 truncation
QUARTIC_EXTRA_TERM = ((1, 2, 0, 1), F(-3, 8))


def _jet(terms: dict, max_degree: int = 4) -> Jet:
    return Jet({e: Scalar(c) for e, c in terms.items()}, max_degree, Z_VARS)


def quadratic_z(max_degree: int = 4) -> Jet:
    """``z2 z3 - z1 z4 - (z1^2 + z2^2)/2``."""
    return _jet(
        {(0, 1, 1, 0): 1, (1, 0, 0, 1): -1, (2, 0, 0, 0): F(-1, 2), (0, 2, 0, 0): F(-1, 2)},
        max_degree,
    )


def quartic_z(include_extra: bool = True) -> Jet:
    """Degree-4 part of the transformed Hamiltonian."""
    terms = dict(_QUARTIC)
    if include_extra:
        terms[QUARTIC_EXTRA_TERM[0]] = QUARTIC_EXTRA_TERM[1]
    return _jet(terms)


def scaled_z() -> GradedSeries:
    """Blown-up Hamiltonian through eps^2 in the z-chart."""
    return GradedSeries(
        {
            0: _jet({(0, 1, 1, 0): 1, (1, 0, 0, 1): -1}),
            1: _jet({(2, 0, 0, 0): F(-1, 2), (0, 2, 0, 0): F(-1, 2)}),
            2: _jet({(1, 0, 0, 3): F(19, 12), (1, 0, 2, 1): F(-3, 2)}),
        },
        2,
    )


def _mono(a=0, b=0, m=0, k=0, s="c", c=1) -> PoissonSeries:
    return PoissonSeries.monomial(a=a, b=b, m=m, k=k, s=s, c=Scalar(c))


def h_tilde() -> PoissonSeries:
    """eps^2 part of the blown-up Hamiltonian in the Sokol'skii chart."""
    return (
        _mono(b=1, m=2, c=F(-13, 32))
        + _mono(b=1, m=2, k=2, c=F(19, 24))
        + _mono(b=1, m=2, k=4, c=F(-37, 96))
        + _mono(a=1, m=3, k=2, s="s", c=F(1, 48))
        + _mono(a=1, m=3, k=4, s="s", c=F(-37, 96))
    )


def _eps1_part() -> PoissonSeries:
    # -(R^2 + Theta^2 / r^2); the blow-up itself yields half of this
    return _mono(a=2, c=-1) + _mono(b=2, m=-2, c=-1)


def sokolskii_hamiltonian() -> GradedSeries:
    """``Theta - eps (R^2 + Theta^2/r^2) + eps^2 H~`` as used for the normal form."""
    return GradedSeries({0: _mono(b=1), 1: _eps1_part(), 2: h_tilde()}, 2)


def normal_form_hamiltonian() -> GradedSeries:
    """``Theta - eps (R^2 + Theta^2/r^2) - alpha eps^2 Theta r^2``."""
    return GradedSeries({0: _mono(b=1), 1: _eps1_part(), 2: _mono(b=1, m=2, c=-ALPHA)}, 2)


def generator_w2() -> PoissonSeries:
    """Second Lie generator in the factorial (triangle) convention, ``W_1 = 0``."""
    return (
        _mono(a=1, m=3, k=2, c=F(1, 48))
        + _mono(b=1, m=2, k=2, s="s", c=F(-19, 24))
        + _mono(a=1, m=3, k=4, c=F(-37, 192))
        + _mono(b=1, m=2, k=4, s="s", c=F(37, 192))
    )


def instability_hamiltonian_z() -> GradedSeries:
    """The normal form pulled back to z: ``Gamma1 - eps(z1^2+z2^2) - alpha eps^2 Gamma1 Gamma3``."""
    z1, z2, z3, z4 = Jet.gens(4, Z_VARS)
    th = z2 * z3 - z1 * z4
    return GradedSeries(
        {0: th, 1: -(z1 * z1 + z2 * z2), 2: (th * (z3 * z3 + z4 * z4)).scale(-ALPHA)},
        2,
    )


def instability_field() -> tuple:
    """Right-hand side of the truncated z-chart equations, one graded series per component."""
    z1, z2, z3, z4 = Jet.gens(4, Z_VARS)
    th = z2 * z3 - z1 * z4
    rho = z3 * z3 + z4 * z4
    a = Scalar(ALPHA)
    return (
        GradedSeries({0: z2, 2: -(z2 * rho + 2 * z3 * th).scale(a)}, 2),
        GradedSeries({0: -z1, 2: (z1 * rho - 2 * z4 * th).scale(a)}, 2),
        GradedSeries({0: z4, 1: 2 * z1, 2: -(z4 * rho).scale(a)}, 2),
        GradedSeries({0: -z3, 1: 2 * z2, 2: (z3 * rho).scale(a)}, 2),
    )


def vdot_parts() -> GradedSeries:
    """``2 eps (z1^2+z2^2) - 2 alpha eps^2 (z3^2+z4^2) Theta``."""
    z1, z2, z3, z4 = Jet.gens(4, Z_VARS)
    th = z2 * z3 - z1 * z4
    return GradedSeries(
        {1: 2 * (z1 * z1 + z2 * z2), 2: ((z3 * z3 + z4 * z4) * th).scale(-2 * ALPHA)},
        2,
    )


def table1_eigenvalues(equilibrium: str, g_over_l: float = 1.0) -> list:
    """Doubled eigenvalue pairs: ``+-j`` at the pendant point, ``+-sqrt(3 g/l)`` upright."""
    if equilibrium == "pendant":
        return [-1j, -1j, 1j, 1j]
    if equilibrium == "upright":
        s = math.sqrt(3 * g_over_l)
        return [-s, -s, s, s]
    raise ValueError(f"unknown equilibrium {equilibrium!r}")
