"""Equations of motion, Lie derivatives and Chetayev instability certificates.

Positivity on a cone is certified syntactically: each epsilon-part of the
expression is written as ``constant * diagonal-SOS * product of oriented
region generators``. A diagonal SOS (even exponents, positive coefficients) is
nonnegative everywhere; it is strictly positive on the region when every
component of its zero set forces some region generator to vanish.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

from .exactalg import Jet, Scalar, Z_VARS
from .poisson import PoissonSeries, to_sokolskii
from .scaling import GradedSeries

__all__ = [
    "VectorFieldSeries",
    "ConeRegion",
    "CertificateTerm",
    "Certificate",
    "ConditionResult",
    "ChetayevReport",
    "ChartMismatch",
    "hamiltonian_vector_field",
    "lie_derivative",
    "certify_positive_on_cone",
    "check_chetayev_conditions",
    "instability_cone",
    "chetayev_function",
]

Z_CHART = "z"
SOK_CHART = "sokolskii"


class ChartMismatch(ValueError):
    pass


def _chart_of(h: GradedSeries) -> str:
    kinds = {type(v) for v in h.parts.values()}
    if kinds <= {Jet}:
        return Z_CHART
    if kinds <= {PoissonSeries}:
        return SOK_CHART
    raise ChartMismatch(f"mixed or unknown part types {kinds}")


@dataclass(frozen=True)
class VectorFieldSeries:
    """Four epsilon-graded components.

    z-chart order is ``(z1', z2', z3', z4')``; Sokol'skii order is
    ``(R', Theta', r', theta')``.
    """

    chart: str
    components: tuple
    source_hamiltonian: GradedSeries
    eps_order: int

    def evaluate(self, point: Sequence[float], eps: float) -> tuple:
        return tuple(c.evaluate(point, eps) for c in self.components)


def hamiltonian_vector_field(h: GradedSeries, chart: str | None = None) -> VectorFieldSeries:
    """Canonical equations for ``h``; the chart follows the part type of ``h``."""
    actual = _chart_of(h) if h.parts else (chart or Z_CHART)
    if chart is not None and chart != actual:
        raise ChartMismatch(f"Hamiltonian lives in the {actual} chart, not {chart}")
    if actual == Z_CHART:
        # pairs (z1, z3), (z2, z4)
        comps = (
            h.map(lambda j: j.diff(2)),
            h.map(lambda j: j.diff(3)),
            h.map(lambda j: -j.diff(0)),
            h.map(lambda j: -j.diff(1)),
        )
    else:
        # pairs (R, r), (Theta, theta)
        comps = (
            h.map(lambda s: s.d_r()),
            h.map(lambda s: s.d_theta()),
            h.map(lambda s: -s.d_R()),
            h.map(lambda s: -s.d_Theta()),
        )
    return VectorFieldSeries(actual, comps, h, h.eps_truncation)


def lie_derivative(v, field: VectorFieldSeries) -> GradedSeries:
    """``grad(v) . field`` graded in epsilon, truncated at ``field.eps_order``."""
    if field.chart == Z_CHART:
        if not isinstance(v, Jet):
            raise ChartMismatch("z-chart field needs a Jet")
        grads = v.gradient()
        zero = v.zero()
    else:
        if not isinstance(v, PoissonSeries):
            raise ChartMismatch("Sokol'skii-chart field needs a PoissonSeries")
        grads = (v.d_R(), v.d_Theta(), v.d_r(), v.d_theta())
        zero = PoissonSeries()
    parts: dict = {}
    for g, comp in zip(grads, field.components):
        if g.is_zero():
            continue
        for k, c in comp.items():
            parts[k] = parts.get(k, zero) + g * c
    return GradedSeries(parts, field.eps_order)


@dataclass(frozen=True)
class ConeRegion:
    """Open set ``{g_i(z) > 0 or < 0}`` given by strict polynomial inequalities."""

    inequalities: tuple  # of (Jet, ">" | "<")
    names: tuple = ()

    def __post_init__(self):
        for g, s in self.inequalities:
            if s not in (">", "<"):
                raise ValueError(f"bad inequality sign {s!r}")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"g{i}" for i in range(len(self.inequalities))))

    def oriented(self) -> list:
        """Generators flipped so that each is positive on the region."""
        return [g if s == ">" else -g for g, s in self.inequalities]

    def contains(self, z: Sequence[float]) -> bool:
        return all(g(z) > 0 for g in self.oriented())

    def contains_exact(self, z: Sequence) -> bool:
        return all(g.evaluate(z).sign() > 0 for g in self.oriented())


def chetayev_function(max_degree: int = 4) -> Jet:
    z1, z2, z3, z4 = Jet.gens(max_degree, Z_VARS)
    return z1 * z3 + z2 * z4


def instability_cone(max_degree: int = 4) -> ConeRegion:
    z1, z2, z3, z4 = Jet.gens(max_degree, Z_VARS)
    return ConeRegion(((z1 * z3 + z2 * z4, ">"), (z2 * z3 - z1 * z4, "<")), ("V", "Theta"))


# -- positivity certificates ---------------------------------------------------


def _is_diagonal_sos(j: Jet) -> bool:
    return not j.is_zero() and all(
        all(x % 2 == 0 for x in e) and c.sign() > 0 for e, c in j.terms.items()
    )


def _zero_components(sos: Jet) -> list:
    """Minimal variable sets whose vanishing kills every monomial of ``sos``."""
    supports = [frozenset(i for i, x in enumerate(e) if x) for e in sos.terms]
    if any(not s for s in supports):
        return []  # a constant term: never zero
    hits = []
    n = sos.nvars
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            cs = frozenset(combo)
            if any(h <= cs for h in hits):
                continue
            if all(s & cs for s in supports):
                hits.append(cs)
    return hits


def _vanishes_on(g: Jet, zero_vars: frozenset) -> bool:
    images = [g.zero() if i in zero_vars else Jet.var(i, g.max_degree, g.variables) for i in range(g.nvars)]
    return g.substitute(images).is_zero()


@dataclass(frozen=True)
class CertificateTerm:
    """``eps^eps_power * constant * sos * prod(factors)`` with ``constant > 0``."""

    eps_power: int
    constant: Scalar
    sos: Jet
    factors: tuple  # names of oriented generators
    strict: bool

    def to_json(self) -> dict:
        return {
            "eps_power": self.eps_power,
            "constant": str(self.constant),
            "sos": self.sos.to_text().strip().splitlines(),
            "factors": list(self.factors),
            "strict_on_region": self.strict,
        }


@dataclass(frozen=True)
class Certificate:
    sign: int | None
    terms: tuple
    residual: dict = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.sign == 1

    def to_json(self) -> dict:
        return {
            "sign": self.sign,
            "terms": [t.to_json() for t in self.terms],
            "residual": {str(k): v.to_text().strip().splitlines() for k, v in self.residual.items()},
        }


def _decompose(part: Jet, region: ConeRegion, k: int) -> CertificateTerm | None:
    gens = list(zip(region.names, region.oriented()))
    for size in range(len(gens) + 1):
        for combo in itertools.combinations(gens, size):
            big = max(part.max_degree, sum(g.degree() for _, g in combo))
            prod = Jet.const(1, big, part.variables)
            for _, g in combo:
                prod = prod * g.with_max_degree(big)
            q = part.with_max_degree(big).divide_exact(prod)
            if q is None or not _is_diagonal_sos(q):
                continue
            lead = q.items()[0][1]
            sos = q / lead
            zeros = _zero_components(sos)
            strict = all(any(_vanishes_on(g, z) for g in region.oriented()) for z in zeros)
            return CertificateTerm(k, lead, sos.with_max_degree(part.max_degree), tuple(n for n, _ in combo), strict)
    return None


def _certify_sign(parts: dict, region: ConeRegion, sign: int):
    terms, residual = [], {}
    for k, p in parts.items():
        t = _decompose(p if sign > 0 else -p, region, k)
        if t is None:
            residual[k] = p
        else:
            terms.append(t)
    return terms, residual


def certify_positive_on_cone(expr, region: ConeRegion) -> Certificate:
    """Syntactic sign certificate for ``expr`` on ``region``.

    Tries positivity first, then negativity. ``sign`` is ``+1``/``-1`` on
    success and ``None`` on failure, in which case ``residual`` holds the
    parts that admitted no decomposition. Failure is not a disproof.
    """
    parts = dict(expr.items()) if isinstance(expr, GradedSeries) else {0: expr}
    if not parts:
        return Certificate(None, (), {})
    first_residual = None
    for sign in (1, -1):
        terms, residual = _certify_sign(parts, region, sign)
        if not residual and any(t.strict for t in terms):
            return Certificate(sign, tuple(terms), {})
        if first_residual is None:
            first_residual = residual if residual else {}
    return Certificate(None, (), first_residual)


# -- Chetayev's theorem -------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ChetayevReport:
    conditions: tuple
    alpha: Scalar | None
    eps_threshold_note: str
    vdot: GradedSeries | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "alpha": None if self.alpha is None else str(self.alpha),
            "conditions": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, **c.data} for c in self.conditions
            ],
            "vdot": None
            if self.vdot is None
            else {f"eps^{k}": v.to_text().strip().splitlines() for k, v in self.vdot.items()},
            "eps_threshold_note": self.eps_threshold_note,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)


def _find_witness(region: ConeRegion, grid=(-1, 0, 1, 2)):
    n = region.inequalities[0][0].nvars
    for pt in itertools.product(grid, repeat=n):
        if region.contains_exact(pt):
            return pt
    return None


def _alpha_of(h: GradedSeries) -> Scalar | None:
    if 2 not in h.parts:
        return None
    part = h.parts[2]
    if isinstance(part, Jet):
        part = to_sokolskii(part)
    c = part.coeff(0, 1, 2, 0)
    return -c if c else None


def check_chetayev_conditions(v: Jet, region: ConeRegion, field: VectorFieldSeries) -> ChetayevReport:
    """Check the four Chetayev conditions for ``v`` on ``region`` along ``field``."""
    results = []
    oriented = region.oriented()

    # (i) origin on the boundary
    at_origin = all(not g.constant() for g in oriented)
    witness = _find_witness(region)
    homogeneous = all(g.is_homogeneous(max(g.low_degree(), 0)) for g in oriented)
    ok = at_origin and witness is not None and homogeneous
    if witness is None:
        detail = "no point of the region found: region appears empty"
    elif not at_origin:
        detail = "some generator does not vanish at the origin"
    elif not homogeneous:
        detail = "generators are not homogeneous; scaled witnesses not certified"
    else:
        detail = (
            "every generator vanishes at 0 and is homogeneous, so delta*w lies in the "
            "region for all delta > 0 while 0 does not"
        )
    results.append(ConditionResult("(i) 0 in boundary", ok, detail, {"witness": list(witness) if witness else None}))

    # (ii) V > 0 on the region
    own = None
    for idx, g in enumerate(oriented):
        q = v.divide_exact(g)
        if q is not None and q.degree() == 0 and q.constant().sign() > 0:
            own = idx
            break
    if own is not None:
        results.append(ConditionResult("(ii) V > 0 on region", True, f"V is a positive multiple of generator {region.names[own]}"))
    else:
        cert = certify_positive_on_cone(v, region)
        results.append(
            ConditionResult("(ii) V > 0 on region", cert.positive, "syntactic certificate", {"certificate": cert.to_json()})
        )

    # (iii) V = 0 on the boundary
    if own is None:
        results.append(ConditionResult("(iii) V = 0 on boundary", False, "V is not a region generator"))
    else:
        invariant, drifting = [], []
        for idx, g in enumerate(oriented):
            if idx == own:
                continue
            (invariant if lie_derivative(g, field).is_zero() else drifting).append(region.names[idx])
        detail = (
            f"boundary face {{{region.names[own]} = 0}} has V = 0; "
            + (
                f"faces {invariant} are level sets of first integrals of the field, so trajectories "
                "cannot leave the region through them"
                if invariant
                else "no other faces"
            )
        )
        if drifting:
            detail = f"generators {drifting} are not conserved; their boundary faces are not controlled"
        results.append(
            ConditionResult("(iii) V = 0 on boundary", not drifting, detail, {"invariant_faces": invariant})
        )

    # (iv) V' > 0 on the region
    vdot = lie_derivative(v, field)
    cert = certify_positive_on_cone(vdot, region)
    detail = (
        "every eps-part is a positive multiple of an SOS times region generators"
        if cert.positive
        else "no positivity certificate for V' on the region"
    )
    results.append(ConditionResult("(iv) V' > 0 on region", cert.positive, detail, {"certificate": cert.to_json()}))

    note = (
        f"certificate covers the field truncated at eps^{field.eps_order}; every certified part is "
        "positive on the region for all eps > 0. Remainder terms of higher eps order are "
        "dominated only for sufficiently small eps; that step is argued, not machine-checked."
    )
    return ChetayevReport(tuple(results), _alpha_of(field.source_hamiltonian), note, vdot)
