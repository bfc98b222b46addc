"""Poisson series in the Sokol'skii chart ``(R, Theta, r, theta)``.

The chart is

    z3 = r cos(theta),   z4 = r sin(theta),
    R = (z1 z3 + z2 z4) / r,   Theta = z2 z3 - z1 z4,

with inverse ``z1 = R cos - (Theta/r) sin``, ``z2 = R sin + (Theta/r) cos``.
Canonical pairs are ``(R, r)`` and ``(Theta, theta)``; in the z-chart they are
``(z1, z3)`` and ``(z2, z4)``.

A term is ``c * R^a Theta^b r^m trig(k theta)`` with ``a, b >= 0``, ``m`` any
integer, ``k >= 0`` and ``trig`` cos or sin. Products of harmonics are
reduced with the product-to-sum identities as soon as they are formed.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Mapping, Sequence

from .exactalg import Jet, Scalar, Z_VARS
from .scaling import GradedSeries

__all__ = [
    "PoissonSeries",
    "NonPolynomialImage",
    "to_sokolskii",
    "from_sokolskii",
    "bracket_sokolskii",
    "bracket_z",
    "z_of_sokolskii",
    "sokolskii_of_z",
    "R",
    "THETA",
    "r",
    "theta_cos",
]

COS, SIN = "c", "s"
_HALF = Scalar(Fraction(1, 2))
_ZERO = Scalar(0)


class NonPolynomialImage(ValueError):
    """A Poisson series does not pull back to a polynomial in z."""


def _norm_key(a, b, m, k, s):
    """Canonical key and sign: negative harmonics folded, ``sin(0)`` dropped."""
    if k < 0:
        k = -k
        sign = -1 if s == SIN else 1
    else:
        sign = 1
    if k == 0 and s == SIN:
        return None, 0
    return (a, b, m, k, s), sign


def _trig_product(k1, s1, k2, s2):
    """Expand trig(k1) * trig(k2) as [(k, parity, coeff)] with coeff in {+-1/2}."""
    if s1 == COS and s2 == COS:
        return [(k1 - k2, COS, 1), (k1 + k2, COS, 1)]
    if s1 == SIN and s2 == SIN:
        return [(k1 - k2, COS, 1), (k1 + k2, COS, -1)]
    if s1 == SIN and s2 == COS:
        return [(k1 + k2, SIN, 1), (k1 - k2, SIN, 1)]
    return [(k1 + k2, SIN, 1), (k1 - k2, SIN, -1)]


def _sort_key(key):
    a, b, m, k, s = key
    return (k, s != COS, a, b, m)


class PoissonSeries:
    """Finite Poisson series with Q(sqrt 2) coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        clean: dict = {}
        for key, c in (terms or {}).items():
            a, b, m, k, s = key
            if a < 0 or b < 0:
                raise ValueError(f"negative R/Theta power in {key}")
            if s not in (COS, SIN):
                raise ValueError(f"bad parity {s!r}")
            nk, sign = _norm_key(int(a), int(b), int(m), int(k), s)
            if nk is None:
                continue
            c = Scalar.coerce(c) * sign
            clean[nk] = clean.get(nk, _ZERO) + c
        self.terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def monomial(cls, a=0, b=0, m=0, k=0, s=COS, c=1) -> "PoissonSeries":
        return cls({(a, b, m, k, s): c})

    @classmethod
    def const(cls, c) -> "PoissonSeries":
        return cls.monomial(c=c)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda t: _sort_key(t[0]))

    def coeff(self, a=0, b=0, m=0, k=0, s=COS) -> Scalar:
        return self.terms.get((a, b, m, k, s), _ZERO)

    def __eq__(self, other):
        if isinstance(other, PoissonSeries):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, Scalar)):
            return self == PoissonSeries.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- algebra --------------------------------------------------------------
    @staticmethod
    def _lift(x) -> "PoissonSeries":
        if isinstance(x, PoissonSeries):
            return x
        return PoissonSeries.const(Scalar.coerce(x))

    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for k, v in o.terms.items():
            out[k] = out.get(k, _ZERO) + v
        return PoissonSeries(out)

    __radd__ = __add__

    def __neg__(self):
        return PoissonSeries({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PoissonSeries":
        c = Scalar.coerce(c)
        return PoissonSeries({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PoissonSeries):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        out: dict = {}
        for (a1, b1, m1, k1, s1), c1 in self.terms.items():
            for (a2, b2, m2, k2, s2), c2 in other.terms.items():
                c = c1 * c2
                base = (a1 + a2, b1 + b2, m1 + m2)
                if k1 == 0 and k2 == 0:
                    key = base + (0, COS)
                    out[key] = out.get(key, _ZERO) + c
                    continue
                if k2 == 0:
                    key = base + (k1, s1)
                    out[key] = out.get(key, _ZERO) + c
                    continue
                if k1 == 0:
                    key = base + (k2, s2)
                    out[key] = out.get(key, _ZERO) + c
                    continue
                for k, s, sg in _trig_product(k1, s1, k2, s2):
                    nk, sign = _norm_key(*base, k, s)
                    if nk is None:
                        continue
                    out[nk] = out.get(nk, _ZERO) + c * _HALF * (sg * sign)
        return PoissonSeries(out)

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __truediv__(self, other):
        return self.scale(Scalar.coerce(other).invert())

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result, base = PoissonSeries.const(1), self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus -------------------------------------------------------------
    def d_R(self) -> "PoissonSeries":
        return PoissonSeries({(a - 1, b, m, k, s): c * a for (a, b, m, k, s), c in self.terms.items() if a})

    def d_Theta(self) -> "PoissonSeries":
        return PoissonSeries({(a, b - 1, m, k, s): c * b for (a, b, m, k, s), c in self.terms.items() if b})

    def d_r(self) -> "PoissonSeries":
        return PoissonSeries({(a, b, m - 1, k, s): c * m for (a, b, m, k, s), c in self.terms.items() if m})

    def d_theta(self) -> "PoissonSeries":
        out = {}
        for (a, b, m, k, s), c in self.terms.items():
            if k == 0:
                continue
            if s == COS:
                out[(a, b, m, k, SIN)] = c * (-k)
            else:
                out[(a, b, m, k, COS)] = c * k
        return PoissonSeries(out)

    def average(self) -> "PoissonSeries":
        """theta-average: the ``k = 0`` part."""
        return PoissonSeries({key: c for key, c in self.terms.items() if key[3] == 0})

    def oscillating(self) -> "PoissonSeries":
        return PoissonSeries({key: c for key, c in self.terms.items() if key[3] != 0})

    def is_theta_free(self) -> bool:
        return all(key[3] == 0 for key in self.terms)

    def max_harmonic(self) -> int:
        return max((key[3] for key in self.terms), default=0)

    # -- evaluation -------------------------------------------------------------
    def __call__(self, point: Sequence[float]) -> float:
        """Float value at ``(R, Theta, r, theta)``."""
        Rv, Th, rv, th = point
        total = 0.0
        for (a, b, m, k, s), c in self.terms.items():
            trig = math.cos(k * th) if s == COS else math.sin(k * th)
            total += float(c) * Rv**a * Th**b * rv**m * trig
        return total

    # -- text ---------------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for (a, b, m, k, s), c in self.items():
            fn = "cos" if s == COS else "sin"
            lines.append(f"{c} * R^{a} Th^{b} r^{m} {fn}({k}θ)")
        return "\n".join(lines) + ("\n" if lines else "")

    _TERM = re.compile(r"^(?P<c>\S+)\s+\*\s+R\^(-?\d+)\s+Th\^(-?\d+)\s+r\^(-?\d+)\s+(cos|sin)\((\d+)θ\)$")

    @classmethod
    def from_text(cls, text: str) -> "PoissonSeries":
        terms: dict = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            mt = cls._TERM.match(line)
            if mt is None:
                raise ValueError(f"bad Poisson term line: {line!r}")
            c = Scalar.parse(mt.group("c"))
            a, b, m = int(mt.group(2)), int(mt.group(3)), int(mt.group(4))
            s = COS if mt.group(5) == "cos" else SIN
            key = (a, b, m, int(mt.group(6)), s)
            terms[key] = terms.get(key, _ZERO) + c
        return cls(terms)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for (a, b, m, k, s), c in self.items():
            fac = [f"R^{a}" if a > 1 else "R"] if a else []
            fac += [f"Th^{b}" if b > 1 else "Th"] if b else []
            fac += [f"r^{m}" if m != 1 else "r"] if m else []
            if k:
                fac.append(f"{'cos' if s == COS else 'sin'}({k}θ)")
            out.append(f"({c})" + ("*" + "*".join(fac) if fac else ""))
        return " + ".join(out)

    def __repr__(self):
        return f"PoissonSeries({self})"


R = PoissonSeries.monomial(a=1)
THETA = PoissonSeries.monomial(b=1)
r = PoissonSeries.monomial(m=1)


def theta_cos(k: int) -> PoissonSeries:
    return PoissonSeries.monomial(k=k)


def _z_images() -> list:
    cos1 = PoissonSeries.monomial(k=1, s=COS)
    sin1 = PoissonSeries.monomial(k=1, s=SIN)
    th_over_r = PoissonSeries.monomial(b=1, m=-1)
    return [
        R * cos1 - th_over_r * sin1,
        R * sin1 + th_over_r * cos1,
        r * cos1,
        r * sin1,
    ]


_Z_IMAGES = _z_images()


def _jet_to_sokolskii(j: Jet) -> PoissonSeries:
    cache = [{0: PoissonSeries.const(1), 1: im} for im in _Z_IMAGES]

    def power(i, n):
        if n not in cache[i]:
            cache[i][n] = power(i, n - 1) * _Z_IMAGES[i]
        return cache[i][n]

    acc: dict = {}
    for e, c in j.terms.items():
        mono = PoissonSeries.const(1)
        for i, n in enumerate(e):
            if n:
                mono = mono * power(i, n)
        for key, v in mono.terms.items():
            acc[key] = acc.get(key, _ZERO) + c * v
    return PoissonSeries(acc)


def to_sokolskii(g):
    """Rewrite a z-polynomial (Jet or graded series of Jets) in the Sokol'skii chart."""
    if isinstance(g, Jet):
        return _jet_to_sokolskii(g)
    return GradedSeries({k: _jet_to_sokolskii(v) for k, v in g.items()}, g.eps_truncation, g.metadata)


def _complex_power_parts(n: int, max_degree: int):
    """Re and Im of ``(z3 + i z4)^n`` as jets: ``r^n cos(n theta)``, ``r^n sin(n theta)``."""
    z3, z4 = Jet.var(2, max_degree, Z_VARS), Jet.var(3, max_degree, Z_VARS)
    re_, im_ = Jet.const(1, max_degree, Z_VARS), z3.zero()
    for _ in range(n):
        re_, im_ = re_ * z3 - im_ * z4, re_ * z4 + im_ * z3
    return re_, im_


def _poisson_to_jet(s: PoissonSeries, max_degree: int) -> Jet:
    if s.is_zero():
        return Jet({}, max_degree, Z_VARS)
    # R^a Th^b r^m trig(k) = V^a Th^b r^(m-a-k) * [r^k trig(k)], V = z1 z3 + z2 z4
    shifts = {}
    for key in s.terms:
        a, b, m, k, _ = key
        rem = m - a - k
        if rem % 2:
            raise NonPolynomialImage(f"odd residual r-power in term {key}")
        shifts[key] = rem
    lift = max(0, -min(shifts.values())) // 2  # multiply through by r^(2*lift)
    work = max(
        [max_degree]
        + [2 * (a + b) + k + shifts[(a, b, m, k, t)] + 2 * lift for (a, b, m, k, t) in s.terms]
    )
    z1, z2, z3, z4 = Jet.gens(work, Z_VARS)
    V = z1 * z3 + z2 * z4
    TH = z2 * z3 - z1 * z4
    rho = z3 * z3 + z4 * z4
    trig = {}
    total = z1.zero()
    for key, c in s.terms.items():
        a, b, m, k, par = key
        if k not in trig:
            trig[k] = _complex_power_parts(k, work)
        harmonic = trig[k][0] if par == COS else trig[k][1]
        e = (shifts[key] + 2 * lift) // 2
        total = total + (V**a * TH**b * rho**e * harmonic).scale(c)
    if lift:
        total = total.divide_exact(rho**lift)
        if total is None:
            raise NonPolynomialImage("series has a genuine pole at r = 0")
    deg = total.degree()
    if deg > max_degree:
        raise NonPolynomialImage(f"pull-back has degree {deg} > max_degree {max_degree}")
    return total.with_max_degree(max_degree)


def from_sokolskii(s, max_degree: int = 4):
    """Pull a Poisson series (or graded series of them) back to z-polynomials.

    Raises
    ------
    NonPolynomialImage
        If the series is not the image of a polynomial of degree <= max_degree.
    """
    if isinstance(s, PoissonSeries):
        return _poisson_to_jet(s, max_degree)
    return GradedSeries(
        {k: _poisson_to_jet(v, max_degree) for k, v in s.items()}, s.eps_truncation, s.metadata
    )


def bracket_sokolskii(u: PoissonSeries, v: PoissonSeries) -> PoissonSeries:
    """``{u, v} = u_R v_r - u_r v_R + u_Theta v_theta - u_theta v_Theta``."""
    return (
        u.d_R() * v.d_r()
        - u.d_r() * v.d_R()
        + u.d_Theta() * v.d_theta()
        - u.d_theta() * v.d_Theta()
    )


def bracket_z(u: Jet, v: Jet) -> Jet:
    """Canonical bracket with pairs ``(z1, z3)`` and ``(z2, z4)``."""
    out = u.zero()
    for q, p in ((0, 2), (1, 3)):
        out = out + u.diff(q) * v.diff(p) - u.diff(p) * v.diff(q)
    return out


def z_of_sokolskii(point: Sequence[float]) -> tuple:
    """Float map ``(R, Theta, r, theta) -> z``."""
    Rv, Th, rv, th = point
    c, s = math.cos(th), math.sin(th)
    return (Rv * c - Th / rv * s, Rv * s + Th / rv * c, rv * c, rv * s)


def sokolskii_of_z(z: Sequence[float]) -> tuple:
    """Float map ``z -> (R, Theta, r, theta)``; undefined at ``z3 = z4 = 0``."""
    z1, z2, z3, z4 = z
    rv = math.hypot(z3, z4)
    return ((z1 * z3 + z2 * z4) / rv, z2 * z3 - z1 * z4, rv, math.atan2(z4, z3))
