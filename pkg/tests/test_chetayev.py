import json
import random
from fractions import Fraction

import pytest

from sokolskii import reference as ref
from sokolskii.chetayev import (
    ChartMismatch,
    ConeRegion,
    certify_positive_on_cone,
    chetayev_function,
    check_chetayev_conditions,
    hamiltonian_vector_field,
    instability_cone,
    lie_derivative,
)
from sokolskii.exactalg import Jet, Z_VARS
from sokolskii.poisson import THETA, PoissonSeries, R, from_sokolskii, to_sokolskii, z_of_sokolskii
from sokolskii.scaling import GradedSeries

z1, z2, z3, z4 = Jet.gens(4, Z_VARS)
ALPHA = ref.ALPHA
V = chetayev_function()
OMEGA = instability_cone()


@pytest.fixture(scope="module")
def field_z():
    return hamiltonian_vector_field(ref.instability_hamiltonian_z())


@pytest.fixture(scope="module")
def field_sok():
    return hamiltonian_vector_field(ref.normal_form_hamiltonian())


def test_normal_form_pulls_back():
    assert from_sokolskii(ref.normal_form_hamiltonian()) == ref.instability_hamiltonian_z()


def test_z_field_matches_reference(field_z):
    assert field_z.chart == "z"
    assert tuple(field_z.components) == ref.instability_field()


def test_vdot(field_z):
    vdot = lie_derivative(V, field_z)
    assert vdot == ref.vdot_parts()
    assert vdot.part(0, None) is None


def test_energy_conserved(field_z):
    assert lie_derivative(ref.instability_hamiltonian_z().parts[0], field_z).part(0, None) is None
    hdot = GradedSeries({}, 2)
    for k, h in ref.instability_hamiltonian_z().items():
        hdot = hdot + GradedSeries({k + j: p for j, p in lie_derivative(h, field_z).items() if k + j <= 2}, 2)
    assert hdot.is_zero()


def test_theta_conserved(field_z):
    assert lie_derivative(z2 * z3 - z1 * z4, field_z).is_zero()


def test_sokolskii_display(field_sok):
    rd, thd, rrd, ad = field_sok.components
    mono = PoissonSeries.monomial
    assert rd.part(0, None) is None
    assert rd.part(1, None) == mono(b=2, m=-3, c=2)
    assert rd.part(2, None) == mono(b=1, m=1, c=-2 * ALPHA)
    assert thd.is_zero()
    assert rrd == GradedSeries({1: R.scale(2)}, 2)
    assert ad == GradedSeries({0: PoissonSeries.const(-1), 1: mono(b=1, m=-2, c=2), 2: mono(m=2, c=ALPHA)}, 2)


def test_theta_alone_rotates_backwards():
    f = hamiltonian_vector_field(GradedSeries({0: THETA}, 2))
    assert f.chart == "sokolskii"
    assert f.components[3] == GradedSeries({0: PoissonSeries.const(-1)}, 2)
    assert all(c.is_zero() for c in f.components[:3])


def test_chart_mismatch(field_sok):
    with pytest.raises(ChartMismatch):
        hamiltonian_vector_field(ref.normal_form_hamiltonian(), "z")
    with pytest.raises(ChartMismatch):
        lie_derivative(V, field_sok)


def test_chart_consistency(field_z, field_sok):
    # chain rule: z_i' = d z_i(R, Theta, r, theta) / dt along the Sokol'skii field
    z_sok = [to_sokolskii(z) for z in Jet.gens(4, Z_VARS)]
    pushed = [lie_derivative(z, field_sok) for z in z_sok]
    rng = random.Random(11)
    eps = 0.1
    for _ in range(200):
        pt = (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.uniform(0, 6.283185307179586))
        z = z_of_sokolskii(pt)
        want = field_z.evaluate(z, eps)
        for p, w in zip(pushed, want):
            assert abs(p.evaluate(pt, eps) - w) <= 1e-10 * max(1.0, abs(w))


# -- certificates ------------------------------------------------------------------

def test_vdot_certificate(field_z):
    cert = certify_positive_on_cone(lie_derivative(V, field_z), OMEGA)
    assert cert.positive and len(cert.terms) == 2
    by_order = {t.eps_power: t for t in cert.terms}
    assert by_order[1].constant == 2 and by_order[1].factors == () and by_order[1].strict
    assert by_order[1].sos == z1 * z1 + z2 * z2
    assert by_order[2].constant == 2 * ALPHA and by_order[2].factors == ("Theta",)
    assert by_order[2].sos == z3 * z3 + z4 * z4


def test_theta_certified_negative():
    cert = certify_positive_on_cone(z2 * z3 - z1 * z4, OMEGA)
    assert cert.sign == -1 and not cert.positive


def test_indefinite_fails():
    cert = certify_positive_on_cone(z1, OMEGA)
    assert cert.sign is None and cert.residual


def test_report_passes(field_z):
    rep = check_chetayev_conditions(V, OMEGA, field_z)
    assert rep.passed
    assert [c.name for c in rep.conditions] == [
        "(i) 0 in boundary",
        "(ii) V > 0 on region",
        "(iii) V = 0 on boundary",
        "(iv) V' > 0 on region",
    ]
    assert rep.alpha == ALPHA
    data = json.loads(rep.dumps())
    w = data["conditions"][0]["witness"]
    assert OMEGA.contains(w)


def test_empty_region(field_z):
    empty = ConeRegion(((V, ">"), (-V, ">")))
    rep = check_chetayev_conditions(V, empty, field_z)
    assert not rep.conditions[0].passed and not rep.passed


def test_linear_field_fails_iv():
    f = hamiltonian_vector_field(GradedSeries({0: z2 * z3 - z1 * z4}, 2))
    rep = check_chetayev_conditions(V, OMEGA, f)
    assert not rep.conditions[3].passed
    assert lie_derivative(V, f).is_zero()


def test_first_order_field_single_term():
    # 2 eps (z1^2 + z2^2) alone is strictly positive on the region: z1 = z2 = 0 forces V = 0
    h = ref.instability_hamiltonian_z()
    f = hamiltonian_vector_field(GradedSeries({0: h.parts[0], 1: h.parts[1]}, 1))
    cert = certify_positive_on_cone(lie_derivative(V, f), OMEGA)
    assert cert.positive and len(cert.terms) == 1


def test_sampled_positivity(field_z):
    vdot = lie_derivative(V, field_z)
    rng = random.Random(2)
    hits = 0
    while hits < 10_000:
        z = [rng.uniform(-1, 1) for _ in range(4)]
        if not OMEGA.contains(z):
            continue
        hits += 1
        assert vdot.evaluate(z, 0.05) > 0


def test_region_membership():
    assert OMEGA.contains((1, 0, 1, 1))
    assert not OMEGA.contains((0, 0, 0, 0))
    assert OMEGA.contains_exact((Fraction(1), 0, 1, 1))
