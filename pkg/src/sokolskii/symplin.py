"""Linear symplectic algebra over Q(sqrt 2).

Variables are ordered ``(q1, q2, p1, p2)`` so the symplectic form is
``J = [[0, I], [-I, 0]]``. In the z-chart this is the pairing
``(z1, z3), (z2, z4)``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exactalg import Jet, Scalar, SQRT2, Z_VARS

__all__ = [
    "Matrix4",
    "J_SP",
    "STANDARDIZING_P",
    "PENDANT_A",
    "STANDARD_FORM",
    "SpectrumReport",
    "hamiltonian_matrix",
    "is_symplectic",
    "conjugate",
    "transform_jet",
    "spectrum",
    "conserved_quadratics",
    "is_conserved",
    "NotConserved",
]

N = 4


class Matrix4:
    """Exact 4x4 matrix with Q(sqrt 2) entries."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(Scalar.coerce(x) for x in row) for row in rows)
        if len(rows) != N or any(len(r) != N for r in rows):
            raise ValueError("Matrix4 needs 4x4 entries")
        self.rows = rows

    @classmethod
    def identity(cls) -> "Matrix4":
        return cls([[int(i == j) for j in range(N)] for i in range(N)])

    @classmethod
    def zero(cls) -> "Matrix4":
        return cls([[0] * N for _ in range(N)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, Matrix4) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __add__(self, other: "Matrix4") -> "Matrix4":
        return Matrix4([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return Matrix4([[-a for a in r] for r in self.rows])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Matrix4):
            cols = other.T.rows
            return Matrix4(
                [[sum((a * b for a, b in zip(r, c)), Scalar(0)) for c in cols] for r in self.rows]
            )
        c = Scalar.coerce(other)
        return Matrix4([[c * a for a in r] for r in self.rows])

    __rmul__ = __mul__

    @property
    def T(self) -> "Matrix4":
        return Matrix4(zip(*self.rows))

    def inverse(self) -> "Matrix4":
        """Gauss-Jordan elimination in exact arithmetic."""
        a = [list(r) + [Scalar(int(i == j)) for j in range(N)] for i, r in enumerate(self.rows)]
        for col in range(N):
            piv = next((r for r in range(col, N) if a[r][col]), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            a[col], a[piv] = a[piv], a[col]
            inv = a[col][col].invert()
            a[col] = [x * inv for x in a[col]]
            for r in range(N):
                if r != col and a[r][col]:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return Matrix4([row[N:] for row in a])

    def trace(self) -> Scalar:
        return sum((self.rows[i][i] for i in range(N)), Scalar(0))

    def charpoly(self) -> list:
        """Exact coefficients ``[1, c1, c2, c3, c4]`` of det(lambda I - M) (Faddeev-LeVerrier)."""
        coeffs = [Scalar(1)]
        m = Matrix4.zero()
        ident = Matrix4.identity()
        for k in range(1, N + 1):
            m = self * m + ident * coeffs[-1]
            coeffs.append(-(self * m).trace() / k)
        return coeffs

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows])

    def __str__(self):
        return "\n".join("[" + "  ".join(str(x) for x in r) + "]" for r in self.rows)

    def __repr__(self):
        return f"Matrix4({[[str(x) for x in r] for r in self.rows]})"

    def to_json(self) -> list:
        return [[str(x) for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> "Matrix4":
        return cls([[Scalar.parse(str(x)) for x in r] for r in data])


J_SP = Matrix4([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])

_q = SQRT2 / 4
_h = SQRT2 / 2
STANDARDIZING_P = Matrix4(
    [
        [-_q, 0, 0, _h],
        [0, _q, -_h, 0],
        [0, -SQRT2, 0, 0],
        [SQRT2, 0, 0, 0],
    ]
)
PENDANT_A = Matrix4([[0, 1, 0, 0], [-1, 0, 0, -1], [0, 0, 0, 1], [0, 0, -1, 0]])
STANDARD_FORM = Matrix4([[0, 1, 0, 0], [-1, 0, 0, 0], [1, 0, 0, 1], [0, 1, -1, 0]])


def hamiltonian_matrix(quadratic: Jet) -> Matrix4:
    """``J * Hess(quadratic)`` for a homogeneous quadratic jet."""
    if not quadratic.is_homogeneous(2):
        raise ValueError("hamiltonian_matrix needs a homogeneous quadratic")
    hess = [[Scalar(0)] * N for _ in range(N)]
    for e, c in quadratic.terms.items():
        idx = [i for i, k in enumerate(e) for _ in range(k)]
        i, j = idx
        if i == j:
            hess[i][i] = hess[i][i] + 2 * c
        else:
            hess[i][j] = hess[i][j] + c
            hess[j][i] = hess[j][i] + c
    return J_SP * Matrix4(hess)


def is_symplectic(m: Matrix4) -> bool:
    return m.T * J_SP * m == J_SP


def conjugate(a: Matrix4, p: Matrix4) -> Matrix4:
    """Exact ``P^-1 A P``."""
    return p.inverse() * a * p


def transform_jet(h: Jet, p: Matrix4, variables: Sequence[str] = Z_VARS) -> Jet:
    """Substitute ``x = P z`` into ``h``; refuses non-symplectic ``P``."""
    if not is_symplectic(p):
        raise ValueError("transform_jet requires a symplectic matrix")
    zs = Jet.gens(h.max_degree, variables)
    images = []
    for row in p.rows:
        acc = zs[0].zero()
        for c, z in zip(row, zs):
            if c:
                acc = acc + z * c
        images.append(acc)
    return h.substitute(images)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple
    classification: str

    def multiplicities(self, tol: float = 1e-10) -> list:
        groups: list = []
        for lam in self.eigenvalues:
            for g in groups:
                if abs(g[0] - lam) <= tol:
                    g[1] += 1
                    break
            else:
                groups.append([lam, 1])
        return [(g[0], g[1]) for g in groups]


def _classify(eigs: Sequence[complex], tol: float) -> str:
    if all(abs(z) <= tol for z in eigs):
        return "other"
    if all(abs(z.imag) <= tol and abs(z.real) > tol for z in eigs):
        return "real-hyperbolic"
    if all(abs(z.real) <= tol and abs(z.imag) > tol for z in eigs):
        distinct = {round(abs(z.imag), 8) for z in eigs}
        return "imaginary-resonant" if len(distinct) == 1 else "other"
    return "other"


def spectrum(m: Matrix4, tol: float = 1e-10) -> SpectrumReport:
    """Eigenvalues from the exact characteristic polynomial.

    Hamiltonian matrices have an even characteristic polynomial
    ``l^4 + b l^2 + c``; its discriminant is decided exactly so repeated
    pairs come out exact to rounding rather than to sqrt(eps).
    """
    cp = m.charpoly()
    if not cp[1] and not cp[3]:
        b, c = cp[2], cp[4]
        disc = b * b - 4 * c
        if not disc:
            mus = [complex(-float(b) / 2)] * 2
        else:
            root = cmath.sqrt(float(disc))
            mus = [(-float(b) + root) / 2, (-float(b) - root) / 2]
        eigs = []
        for mu in mus:
            s = cmath.sqrt(mu)
            eigs += [s, -s]
    else:
        eigs = list(np.roots([float(x) for x in cp]).astype(complex))
    eigs = sorted(eigs, key=lambda z: (round(z.imag, 9), round(z.real, 9)))
    return SpectrumReport(tuple(complex(z) for z in eigs), _classify(eigs, tol))


class NotConserved(ValueError):
    """A candidate quadratic is not invariant under the transposed linear flow."""


def _linear_field(a: Matrix4, variables=Z_VARS, max_degree: int = 4) -> list:
    zs = Jet.gens(max_degree, variables)
    out = []
    for row in a.rows:
        acc = zs[0].zero()
        for c, z in zip(row, zs):
            if c:
                acc = acc + z * c
        out.append(acc)
    return out


def is_conserved(gamma: Jet, a: Matrix4) -> bool:
    """True when ``grad(gamma) . (A z) == 0`` identically."""
    field = _linear_field(a, gamma.variables, gamma.max_degree)
    total = gamma.zero()
    for g, f in zip(gamma.gradient(), field):
        total = total + g * f
    return total.is_zero()


def conserved_quadratics(a_std: Matrix4, candidates: Sequence[Jet] | None = None) -> list:
    """Quadratic invariants of ``z' = A_std^T z``; defaults to Gamma_1 and Gamma_3.

    Raises
    ------
    NotConserved
        If any candidate is not conserved.
    """
    if candidates is None:
        z1, z2, z3, z4 = Jet.gens(4, Z_VARS)
        candidates = [z2 * z3 - z1 * z4, z3 * z3 + z4 * z4]
    at = a_std.T
    for g in candidates:
        if not is_conserved(g, at):
            raise NotConserved(f"{g} is not conserved by the transposed linear flow")
    return list(candidates)

