"""Quasi-homogeneous symplectic blow-up and the epsilon-graded series it produces."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from .exactalg import Jet, Scalar

__all__ = [
    "GradedSeries",
    "NegativeEpsPower",
    "blowup",
    "truncate_eps",
    "BLOWUP_WEIGHTS",
    "BLOWUP_MULTIPLIER_POWER",
]

BLOWUP_WEIGHTS = (2, 2, 1, 1)
BLOWUP_MULTIPLIER_POWER = 3


class NegativeEpsPower(ValueError):
    """A monomial would acquire a negative power of epsilon under the blow-up."""


@dataclass(frozen=True)
class GradedSeries:
    """Finite series ``sum_k eps^k * parts[k]``.

    ``parts`` values are :class:`~sokolskii.exactalg.Jet` or
    :class:`~sokolskii.poisson.PoissonSeries`; anything with ``is_zero``,
    ``+``, ``-`` and scalar ``*`` works. Zero parts are never stored.
    """

    parts: Mapping[int, object]
    eps_truncation: int
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.eps_truncation < 0:
            raise ValueError("eps_truncation must be non-negative")
        clean = {}
        for k, v in self.parts.items():
            if k < 0:
                raise ValueError("negative epsilon exponent")
            if k <= self.eps_truncation and not v.is_zero():
                clean[int(k)] = v
        object.__setattr__(self, "parts", dict(sorted(clean.items())))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __getitem__(self, k: int):
        return self.parts.get(k)

    def part(self, k: int, zero):
        """Part at ``eps^k`` or ``zero`` if absent."""
        return self.parts.get(k, zero)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def items(self):
        return self.parts.items()

    def is_zero(self) -> bool:
        return not self.parts

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return self.parts == other.parts and self.eps_truncation == other.eps_truncation

    def map(self, fn: Callable) -> "GradedSeries":
        return GradedSeries({k: fn(v) for k, v in self.parts.items()}, self.eps_truncation, self.metadata)

    def __add__(self, other: "GradedSeries") -> "GradedSeries":
        order = min(self.eps_truncation, other.eps_truncation)
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out[k] + v if k in out else v
        return GradedSeries({k: v for k, v in out.items() if k <= order}, order, self.metadata)

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GradedSeries":
        return self.map(lambda v: v * Scalar.coerce(c))

    def evaluate(self, point, eps: float) -> float:
        """Float value with ``eps`` substituted."""
        return sum(eps**k * v(point) for k, v in self.parts.items())

    def __str__(self):
        return " + ".join(f"eps^{k}*[{v}]" for k, v in self.parts.items()) or "0"

    def to_text(self) -> str:
        """Blocks headed ``eps^k``, each in the part type's own text format."""
        blocks = []
        for k, v in self.parts.items():
            blocks.append(f"eps^{k}\n{v.to_text()}")
        return "".join(blocks)

    @classmethod
    def from_text(cls, text: str, parse_part: Callable[[str], object], eps_truncation: int | None = None):
        parts: dict = {}
        current, buf = None, []
        for line in text.splitlines() + ["eps^END"]:
            s = line.strip()
            if s.startswith("eps^"):
                if current is not None:
                    parts[current] = parse_part("\n".join(buf))
                current = None if s == "eps^END" else int(s[4:])
                buf = []
            elif s.startswith("#") and current is None:
                continue
            else:
                buf.append(line)
        top = max(parts, default=0)
        return cls(parts, top if eps_truncation is None else eps_truncation)


def blowup(
    h: Jet,
    weights=BLOWUP_WEIGHTS,
    multiplier_power: int = BLOWUP_MULTIPLIER_POWER,
    eps_truncation: int = 2,
) -> GradedSeries:
    """Grade ``eps^-mult * h(eps^w1 z1, ..., eps^w4 z4)`` by powers of epsilon.

    Each monomial ``z^a`` lands at ``eps^(w . a - mult)`` with its coefficient
    unchanged; parts above ``eps_truncation`` are dropped.

    Raises
    ------
    NegativeEpsPower
        If some monomial has weighted degree below ``multiplier_power``.
    """
    if eps_truncation < 0:
        raise ValueError("eps_truncation must be non-negative")
    buckets: dict = {}
    for e, c in h.terms.items():
        k = sum(w * a for w, a in zip(weights, e)) - multiplier_power
        if k < 0:
            raise NegativeEpsPower(f"monomial {e} maps to eps^{k}")
        if k <= eps_truncation:
            buckets.setdefault(k, {})[e] = c
    parts = {k: Jet(t, h.max_degree, h.variables) for k, t in buckets.items()}
    # a monomial of degree d has weight >= d * min(weights); the first degree
    # not represented in h bounds how far the grading is complete
    first_missing = h.max_degree + 1
    if all(sum(e) % 2 == 0 for e in h.terms):
        first_missing += first_missing % 2
    complete = first_missing * min(weights) - multiplier_power - 1
    meta = {
        "weights": tuple(weights),
        "multiplier_power": multiplier_power,
        "time_rescaled": True,
        "complete_through": complete,
    }
    return GradedSeries(parts, eps_truncation, meta)


def truncate_eps(g: GradedSeries, order: int) -> GradedSeries:
    order = min(order, g.eps_truncation)
    return GradedSeries({k: v for k, v in g.parts.items() if k <= order}, order, g.metadata)
