"""Deprit Lie-triangle normal forms in the Sokol'skii chart.

The triangle uses the factorial convention

    H(eps) = sum_i eps^i / i! * H_i^0,    W(eps) = sum_i eps^i / i! * W_{i+1},

with the recursion

    H_i^j = H_{i+1}^{j-1} + sum_{k=0}^{i} C(i, k) {H_{i-k}^{j-1}, W_{k+1}}.

Inputs and outputs of :func:`normal_form` use plain powers of epsilon; the
conversion by ``i!`` happens at the boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .poisson import THETA, PoissonSeries, bracket_sokolskii
from .scaling import GradedSeries

__all__ = [
    "LieTriangle",
    "NormalFormResult",
    "UnsupportedLinearPart",
    "deprit_step",
    "solve_homological",
    "normal_form",
    "verify_normal_form_invariance",
]

_ZERO = PoissonSeries()


class UnsupportedLinearPart(ValueError):
    """The homological solver only handles ``H_0^0 = Theta``."""


@dataclass(frozen=True)
class LieTriangle:
    """Cells ``(i, j) -> H_i^j`` and generators ``[W_1, W_2, ...]``."""

    entries: dict = field(default_factory=dict)
    generators: tuple = ()

    @property
    def depth(self) -> int:
        """Index of the last completed diagonal (0 for just ``H_0^0``)."""
        return max((i + j for i, j in self.entries), default=-1)

    def __getitem__(self, ij) -> PoissonSeries:
        return self.entries[ij]

    def column0(self) -> list:
        return [self.entries[(i, 0)] for i in range(self.depth + 1)]

    def check(self) -> bool:
        """Re-derive every cell from column 0 and the stored generators."""
        rebuilt = LieTriangle({(0, 0): self.entries[(0, 0)]})
        for n in range(1, self.depth + 1):
            rebuilt = deprit_step(rebuilt, self.entries[(n, 0)], self.generators[n - 1])
        return rebuilt.entries == self.entries


def deprit_step(tri: LieTriangle, new_entry: PoissonSeries, generator: PoissonSeries) -> LieTriangle:
    """Fill diagonal ``n = depth + 1`` from ``H_n^0 = new_entry`` and ``W_n = generator``."""
    n = tri.depth + 1
    if n == 0:
        return LieTriangle({(0, 0): new_entry}, ())
    gens = tuple(tri.generators) + (generator,)
    entries = dict(tri.entries)
    entries[(n, 0)] = new_entry
    for j in range(1, n + 1):
        i = n - j
        cell = entries[(i + 1, j - 1)]
        for k in range(i + 1):
            w = gens[k]
            if w.is_zero():
                continue
            cell = cell + bracket_sokolskii(entries[(i - k, j - 1)], w).scale(math.comb(i, k))
        entries[(i, j)] = cell
    return LieTriangle(entries, gens)


def solve_homological(h00: PoissonSeries, rhs: PoissonSeries):
    """Solve ``{Theta, W} = -oscillating(rhs)``.

    Returns
    -------
    (W, normal_part)
        ``W`` has no theta-free terms; ``normal_part`` is the theta-average of
        ``rhs`` so that ``rhs + {Theta, W} == normal_part``.
    """
    if h00 != THETA:
        raise UnsupportedLinearPart(f"homological equation only solved for H00 = Theta, got {h00}")
    w: dict = {}
    for (a, b, m, k, s), c in rhs.oscillating().terms.items():
        # d/dtheta cos(k) = -k sin(k), d/dtheta sin(k) = k cos(k)
        if s == "c":
            w[(a, b, m, k, "s")] = c * (-1) / k
        else:
            w[(a, b, m, k, "c")] = c / k
    return PoissonSeries(w), rhs.average()


@dataclass(frozen=True)
class NormalFormResult:
    normal_hamiltonian: GradedSeries
    generators: tuple
    residual_order: int
    triangle: LieTriangle


def normal_form(
    h: GradedSeries,
    depth: int | None = None,
    unsimplified_orders: Iterable[int] = (1,),
) -> NormalFormResult:
    """Normalize ``h`` (plain eps powers) through ``eps^depth``.

    At orders in ``unsimplified_orders`` the generator is set to zero (the
    order-one term is part of the linear dynamics and is kept as is); at the
    other orders the homological equation removes every theta harmonic.
    """
    depth = h.eps_truncation if depth is None else depth
    skip = set(unsimplified_orders)
    h00 = h.part(0, _ZERO)
    if h00 != THETA:
        raise UnsupportedLinearPart(f"eps^0 part must be Theta, got {h00}")
    tri = LieTriangle({(0, 0): h00})
    for n in range(1, depth + 1):
        hn0 = h.part(n, _ZERO).scale(math.factorial(n))
        trial = deprit_step(tri, hn0, _ZERO)
        rhs = trial[(0, n)]
        if n in skip:
            w = _ZERO
        else:
            w, _ = solve_homological(h00, rhs)
        tri = deprit_step(tri, hn0, w)
    parts = {n: tri[(0, n)] / math.factorial(n) for n in range(depth + 1)}
    nh = GradedSeries(parts, depth, {"factorial_convention": "plain"})
    return NormalFormResult(nh, tri.generators, depth, tri)


def _parts(obj) -> Sequence[PoissonSeries]:
    if isinstance(obj, NormalFormResult):
        return list(obj.normal_hamiltonian.parts.values())
    if isinstance(obj, GradedSeries):
        return list(obj.parts.values())
    return [obj]


def verify_normal_form_invariance(obj) -> bool:
    """Every graded part is theta-free and Poisson-commutes with Theta."""
    for part in _parts(obj):
        if not part.is_theta_free():
            return False
        if not bracket_sokolskii(THETA, part).is_zero():
            return False
    return True
