"""Exact arithmetic over Q(sqrt 2) and truncated polynomial jets in four variables.

Everything downstream (linear transforms, blow-up, Poisson series, normal
forms) is built on these two types, so both are immutable and hashable and
keep a canonical representation: rationals in lowest terms, zero
coefficients pruned, terms above the truncation degree dropped.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "Scalar",
    "SQRT2",
    "Jet",
    "PoleAtOrigin",
    "UnsupportedShift",
    "jet_compose_elem",
    "Y_VARS",
    "Z_VARS",
    "DEFAULT_MAX_DEGREE",
]

DEFAULT_MAX_DEGREE = 4
Y_VARS = ("y1", "y2", "p1", "p2")
Z_VARS = ("z1", "z2", "z3", "z4")

Number = Union[int, Fraction, "Scalar"]


class PoleAtOrigin(ValueError):
    """Reciprocal requested of a jet with zero constant term."""


class UnsupportedShift(ValueError):
    """sin/cos requested of a jet with a nonzero constant term."""


class Scalar:
    """Element ``rat + root2 * sqrt(2)`` of Q(sqrt 2) with exact rational parts.

    >>> (Scalar(1, 1) * Scalar(1, -1))
    Scalar(-1)
    """

    __slots__ = ("rat", "root2")

    def __init__(self, rat: Union[int, Fraction, str] = 0, root2: Union[int, Fraction, str] = 0):
        object.__setattr__(self, "rat", Fraction(rat))
        object.__setattr__(self, "root2", Fraction(root2))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def coerce(cls, x: Number) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot convert {type(x).__name__} to Scalar")

    # -- field operations ---------------------------------------------------
    def __add__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return Scalar(self.rat + o.rat, self.root2 + o.root2)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.rat, -self.root2)

    def __sub__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return Scalar(self.rat - o.rat, self.root2 - o.root2)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, c, d = self.rat, self.root2, o.rat, o.root2
        if not b and not d:
            return Scalar(a * c)
        return Scalar(a * c + 2 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``rat**2 - 2*root2**2`` (product with the conjugate)."""
        return self.rat * self.rat - 2 * self.root2 * self.root2

    def conjugate(self) -> "Scalar":
        return Scalar(self.rat, -self.root2)

    def invert(self) -> "Scalar":
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(sqrt2)")
        n = self.norm()
        return Scalar(self.rat / n, -self.root2 / n)

    def __truediv__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.invert()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.invert()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.invert() ** (-n)
        result, base = Scalar(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparisons ----------------------------------------------------------
    def __bool__(self):
        return bool(self.rat) or bool(self.root2)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.root2 and self.rat == other
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.rat == other.rat and self.root2 == other.root2

    def __hash__(self):
        if not self.root2:
            return hash(self.rat)
        return hash((self.rat, self.root2))

    def sign(self) -> int:
        """Exact sign of the real number ``rat + root2*sqrt(2)``."""
        sa = (self.rat > 0) - (self.rat < 0)
        sb = (self.root2 > 0) - (self.root2 < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare rat^2 with 2*root2^2
        n = self.norm()
        return sa if n > 0 else sb

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        return float(self.rat) + float(self.root2) * math.sqrt(2.0)

    @property
    def is_rational(self) -> bool:
        return not self.root2

    # -- text ---------------------------------------------------------------
    def __str__(self):
        if not self.root2:
            return str(self.rat)
        r2 = f"{self.root2}*sqrt2"
        if not self.rat:
            return r2
        sep = "-" if self.root2 < 0 else "+"
        return f"{self.rat}{sep}{abs(self.root2)}*sqrt2"

    def __repr__(self):
        if not self.root2:
            return f"Scalar({self.rat})"
        return f"Scalar({self.rat}, {self.root2})"

    _PARSE = re.compile(
        # a surd after a rational part needs its own sign: "1/10*sqrt2" is not "1/1" + "0*sqrt2"
        r"^(?:(?P<rat>[+-]?\d+(?:/\d+)?)(?=$|[+-]))?"
        r"(?P<surd>(?P<sign>(?(rat)[+-]|[+-]?))(?:(?P<coef>\d+(?:/\d+)?)\*)?sqrt2)?$"
    )

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        """Inverse of ``str``: accepts ``p/q``, ``p/q*sqrt2``, ``sqrt2`` and ``p/q+p'/q'*sqrt2``."""
        m = cls._PARSE.match(text.replace(" ", ""))
        if m is None or not (m.group("rat") or m.group("surd")):
            raise ValueError(f"not a Q(sqrt2) literal: {text!r}")
        root2 = Fraction(0)
        if m.group("surd"):
            root2 = Fraction(m.group("coef") or 1)
            if m.group("sign") == "-":
                root2 = -root2
        return cls(Fraction(m.group("rat") or 0), root2)


SQRT2 = Scalar(0, 1)
_ZERO = Scalar(0)
_ONE = Scalar(1)

Exponent = tuple


def _grlex_key(e: Exponent):
    return (sum(e), tuple(-x for x in e))


class Jet:
    """Truncated polynomial in four variables with Q(sqrt 2) coefficients.

    Parameters
    ----------
    terms : mapping
        Exponent 4-tuple -> coefficient (int, Fraction or Scalar).
    max_degree : int
        Truncation order; terms of higher total degree are discarded.
    variables : tuple of str
        Display names, used only for serialization.
    """

    __slots__ = ("terms", "max_degree", "variables", "nvars")

    def __init__(
        self,
        terms: Mapping[Exponent, Number] | None = None,
        max_degree: int = DEFAULT_MAX_DEGREE,
        variables: Sequence[str] = Y_VARS,
    ):
        if max_degree < 0:
            raise ValueError("max_degree must be non-negative")
        self.max_degree = int(max_degree)
        self.variables = tuple(variables)
        self.nvars = len(self.variables)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars or min(e) < 0:
                raise ValueError(f"bad exponent {e}")
            if sum(e) > self.max_degree:
                continue
            c = Scalar.coerce(c)
            if c:
                clean[e] = c
        self.terms = clean

    # -- constructors ----------------------------------------------------------
    @classmethod
    def const(cls, c: Number, max_degree=DEFAULT_MAX_DEGREE, variables=Y_VARS) -> "Jet":
        n = len(variables)
        return cls({(0,) * n: c}, max_degree, variables)

    @classmethod
    def var(cls, i: int, max_degree=DEFAULT_MAX_DEGREE, variables=Y_VARS) -> "Jet":
        e = [0] * len(variables)
        e[i] = 1
        return cls({tuple(e): 1}, max_degree, variables)

    @classmethod
    def gens(cls, max_degree=DEFAULT_MAX_DEGREE, variables=Y_VARS) -> tuple:
        return tuple(cls.var(i, max_degree, variables) for i in range(len(variables)))

    def _like(self, terms) -> "Jet":
        return Jet(terms, self.max_degree, self.variables)

    def zero(self) -> "Jet":
        return self._like({})

    def one(self) -> "Jet":
        return self._like({(0,) * self.nvars: 1})

    def with_variables(self, variables: Sequence[str]) -> "Jet":
        return Jet(self.terms, self.max_degree, variables)

    def with_max_degree(self, max_degree: int) -> "Jet":
        return Jet(self.terms, max_degree, self.variables)

    # -- queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        """Largest total degree present (-1 for the zero jet)."""
        return max((sum(e) for e in self.terms), default=-1)

    def low_degree(self) -> int:
        return min((sum(e) for e in self.terms), default=-1)

    def coeff(self, e: Exponent) -> Scalar:
        return self.terms.get(tuple(e), _ZERO)

    def constant(self) -> Scalar:
        return self.coeff((0,) * self.nvars)

    def homogeneous_part(self, d: int) -> "Jet":
        return self._like({e: c for e, c in self.terms.items() if sum(e) == d})

    def is_homogeneous(self, d: int) -> bool:
        return all(sum(e) == d for e in self.terms)

    def items(self):
        """Terms in graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]))

    # -- ring operations ---------------------------------------------------------
    def _check(self, other: "Jet"):
        if other.max_degree != self.max_degree:
            raise ValueError(
                f"max_degree mismatch: {self.max_degree} vs {other.max_degree}"
            )
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return other
        return self._like({(0,) * self.nvars: Scalar.coerce(other)})

    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out.get(e, _ZERO) + c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Number) -> "Jet":
        c = Scalar.coerce(c)
        if not c:
            return self.zero()
        return self._like({e: c * v for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Jet):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        out: dict = {}
        md = self.max_degree
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > md:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, _ZERO) + c1 * c2
        return self._like(out)

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return NotImplemented
        return self.scale(Scalar.coerce(other).invert())

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result, base = self.one(), self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Jet):
            return (
                self.max_degree == other.max_degree
                and self.nvars == other.nvars
                and self.terms == other.terms
            )
        if isinstance(other, (int, Fraction, Scalar)):
            return self == self._lift(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.max_degree, frozenset(self.terms.items())))

    # -- calculus and substitution ---------------------------------------------
    def diff(self, i: int) -> "Jet":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return self._like(out)

    def gradient(self) -> tuple:
        return tuple(self.diff(i) for i in range(self.nvars))

    def substitute(self, images: Sequence["Jet"]) -> "Jet":
        """Compose: replace variable ``i`` by ``images[i]`` and truncate.

        The result lives in the images' ring (their max_degree and names).
        """
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0]
        for im in images[1:]:
            target._check(im)
        cache: list[dict] = [{0: target.one()} for _ in images]

        def power(i, k):
            table = cache[i]
            if k not in table:
                table[k] = power(i, k - 1) * images[i]
            return table[k]

        acc: dict = {}
        for e, c in self.terms.items():
            mono = target.one()
            for i, k in enumerate(e):
                if k:
                    mono = mono * power(i, k)
            for f, v in mono.terms.items():
                acc[f] = acc.get(f, _ZERO) + c * v
        return target._like(acc)

    def evaluate(self, point: Sequence[Number]) -> Scalar:
        """Exact evaluation at a point with Q(sqrt2) coordinates."""
        pt = [Scalar.coerce(x) for x in point]
        total = _ZERO
        for e, c in self.terms.items():
            v = c
            for x, k in zip(pt, e):
                if k:
                    v = v * x**k
            total = total + v
        return total

    def __call__(self, point: Sequence[float]) -> float:
        """Floating-point evaluation."""
        total = 0.0
        for e, c in self.terms.items():
            v = float(c)
            for x, k in zip(point, e):
                if k:
                    v *= x**k
            total += v
        return total

    def divide_exact(self, divisor: "Jet") -> "Jet | None":
        """Exact polynomial quotient ``self / divisor`` or None if not divisible.

        Division by a single polynomial in a fixed monomial order leaves a zero
        remainder exactly when the divisor divides; truncation is not applied.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero jet")
        order = lambda e: _grlex_key(e)  # noqa: E731
        lead = min(divisor.terms, key=order)
        lc_inv = divisor.terms[lead].invert()
        rem = dict(self.terms)
        quot: dict = {}
        while rem:
            e = min(rem, key=order)
            if any(a < b for a, b in zip(e, lead)):
                return None
            q = tuple(a - b for a, b in zip(e, lead))
            qc = rem[e] * lc_inv
            quot[q] = qc
            for f, c in divisor.terms.items():
                g = tuple(a + b for a, b in zip(q, f))
                v = rem.get(g, _ZERO) - qc * c
                if v:
                    rem[g] = v
                else:
                    rem.pop(g, None)
        return Jet(quot, max(self.max_degree, 0), self.variables)

    # -- text ---------------------------------------------------------------
    def to_text(self, header: bool = False) -> str:
        """One term per line: ``coef * v1^a v2^b v3^c v4^d`` in graded-lex order."""
        lines = []
        if header:
            lines.append(f"# vars: {' '.join(self.variables)} max_degree: {self.max_degree}")
        for e, c in self.items():
            mono = " ".join(f"{v}^{k}" for v, k in zip(self.variables, e))
            lines.append(f"{c} * {mono}")
        return "\n".join(lines) + ("\n" if lines else "")

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)

    def __repr__(self):
        return f"Jet({self}, max_degree={self.max_degree})"

    @classmethod
    def from_text(
        cls,
        text: str,
        max_degree: int | None = None,
        variables: Sequence[str] | None = None,
    ) -> "Jet":
        """Parse :meth:`to_text` output. A ``# vars:`` header overrides defaults."""
        terms: dict = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.match(r"#\s*vars:\s*(.*?)\s+max_degree:\s*(\d+)", line)
                if m:
                    variables = variables or tuple(m.group(1).split())
                    max_degree = max_degree if max_degree is not None else int(m.group(2))
                continue
            coef, _, mono = line.partition(" * ")
            names, exps = [], []
            for tok in mono.split():
                name, _, k = tok.partition("^")
                names.append(name)
                exps.append(int(k))
            if variables is None:
                variables = tuple(names)
            elif tuple(names) != tuple(variables):
                raise ValueError(f"variable names {names} do not match {variables}")
            e = tuple(exps)
            terms[e] = terms.get(e, _ZERO) + Scalar.parse(coef)
        variables = tuple(variables or Y_VARS)
        if max_degree is None:
            max_degree = max((sum(e) for e in terms), default=DEFAULT_MAX_DEGREE)
            max_degree = max(max_degree, DEFAULT_MAX_DEGREE)
        return cls(terms, max_degree, variables)


def _maclaurin(kind: str, n: int) -> Fraction:
    if kind == "sin":
        return Fraction((-1) ** ((n - 1) // 2), math.factorial(n)) if n % 2 else Fraction(0)
    if kind == "cos":
        return Fraction((-1) ** (n // 2), math.factorial(n)) if n % 2 == 0 else Fraction(0)
    raise ValueError(kind)


def jet_compose_elem(kind: str, u: Jet) -> Jet:
    """Compose ``sin``, ``cos`` or ``recip`` with a jet, truncating at ``u.max_degree``."""
    c0 = u.constant()
    if kind in ("sin", "cos"):
        if c0:
            raise UnsupportedShift(f"{kind} of a jet with constant term {c0}")
        # Horner in u; u has no constant term so u**n vanishes past max_degree
        acc = u.zero()
        for n in range(u.max_degree, -1, -1):
            acc = acc * u + _maclaurin(kind, n)
        return acc
    if kind == "recip":
        if not c0:
            raise PoleAtOrigin("reciprocal of a jet vanishing at the origin")
        inv0 = c0.invert()
        v = (u - c0) * inv0  # u = c0 (1 + v)
        acc = u.zero()
        for n in range(u.max_degree, -1, -1):
            acc = acc * (-v) + 1
        return acc * inv0
    raise ValueError(f"unsupported elementary function {kind!r}")


def monomials(nvars: int, max_degree: int) -> Iterable[tuple]:
    """All exponent vectors of total degree <= max_degree, graded-lex order."""
    es = [e for e in product(range(max_degree + 1), repeat=nvars) if sum(e) <= max_degree]
    return sorted(es, key=_grlex_key)
