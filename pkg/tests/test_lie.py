from fractions import Fraction

import pytest

from sokolskii import reference as ref
from sokolskii.chetayev import hamiltonian_vector_field
from sokolskii.exactalg import Jet, Scalar, Z_VARS
from sokolskii.lie import (
    LieTriangle,
    UnsupportedLinearPart,
    deprit_step,
    normal_form,
    solve_homological,
    verify_normal_form_invariance,
)
from sokolskii.poisson import THETA, PoissonSeries, R, bracket_sokolskii, bracket_z, from_sokolskii, r
from sokolskii.scaling import GradedSeries
from sokolskii.sim import _rk4, compile_field, compile_polynomial

ZERO = PoissonSeries()


def test_reference_normal_form():
    res = normal_form(ref.sokolskii_hamiltonian())
    assert res.normal_hamiltonian == ref.normal_form_hamiltonian()
    assert res.generators[0].is_zero()
    assert res.generators[1] == ref.generator_w2()
    assert res.residual_order == 2
    assert res.triangle.check()


def test_derived_normal_form(pipeline_chain):
    res = normal_form(pipeline_chain[3])
    nf = res.normal_hamiltonian
    want = ref.normal_form_hamiltonian()
    assert nf.part(0, None) == want.part(0, None)
    assert nf.part(2, None) == want.part(2, None)
    assert nf.part(1, None) == want.part(1, None) / 2
    assert verify_normal_form_invariance(res)


def test_w1_zero_collapses_first_row():
    h = ref.sokolskii_hamiltonian()
    tri = LieTriangle({(0, 0): THETA})
    tri = deprit_step(tri, h.part(1, ZERO), ZERO)
    assert tri[(0, 1)] == tri[(1, 0)]


def test_second_order_combination():
    h = ref.sokolskii_hamiltonian()
    h20 = h.part(2, ZERO).scale(2)
    w2 = ref.generator_w2()
    tri = deprit_step(LieTriangle({(0, 0): THETA}), h.part(1, ZERO), ZERO)
    tri = deprit_step(tri, h20, w2)
    assert tri[(0, 2)] == h20 + bracket_sokolskii(THETA, w2) + bracket_sokolskii(h.part(1, ZERO), ZERO)


def test_zero_hamiltonian_row():
    w = PoissonSeries.monomial(a=1, k=2)
    tri = deprit_step(LieTriangle({(0, 0): ZERO}), ZERO, w)
    assert all(v.is_zero() for v in tri.entries.values())


def test_homological_on_h_tilde():
    w, normal = solve_homological(THETA, ref.h_tilde())
    assert normal == PoissonSeries.monomial(b=1, m=2, c=Scalar(Fraction(-13, 32)))
    assert w.max_harmonic() == 4 and len(w) == 4
    assert (bracket_sokolskii(THETA, w) + ref.h_tilde().oscillating()).is_zero()
    assert normal + ref.h_tilde().oscillating() == ref.h_tilde()


def test_homological_theta_free():
    rhs = R * R + THETA * r
    w, normal = solve_homological(THETA, rhs)
    assert w.is_zero() and normal == rhs


def test_homological_cos2():
    rhs = PoissonSeries.monomial(k=2)
    w, normal = solve_homological(THETA, rhs)
    assert w == PoissonSeries.monomial(k=2, s="s", c=Scalar(Fraction(-1, 2)))
    assert normal.is_zero()
    assert (w.d_theta() + rhs).is_zero()


def test_unsupported_linear_part():
    with pytest.raises(UnsupportedLinearPart):
        solve_homological(R, THETA)
    with pytest.raises(UnsupportedLinearPart):
        normal_form(GradedSeries({0: R}, 2))


def test_already_normal_unchanged():
    h = ref.normal_form_hamiltonian()
    res = normal_form(h)
    assert res.normal_hamiltonian == h
    assert all(w.is_zero() for w in res.generators)


def test_invariance_checks():
    assert verify_normal_form_invariance(ref.normal_form_hamiltonian())
    assert not verify_normal_form_invariance(ref.h_tilde())
    assert verify_normal_form_invariance(PoissonSeries.const(3))


def test_generator_pulls_back_to_polynomial():
    w = from_sokolskii(ref.generator_w2(), 4)
    assert w.is_homogeneous(4)


def test_triangle_check_detects_tampering():
    res = normal_form(ref.sokolskii_hamiltonian())
    entries = dict(res.triangle.entries)
    entries[(0, 2)] = entries[(0, 2)] + THETA
    assert not LieTriangle(entries, res.triangle.generators).check()


def test_equivalence_oracle():
    """Original and normalized systems agree on (Theta, r^2) to O(eps^3) over t <= 10."""
    eps = 0.05
    h = from_sokolskii(ref.sokolskii_hamiltonian(), 6)
    res = normal_form(ref.sokolskii_hamiltonian())
    k = from_sokolskii(res.normal_hamiltonian, 6)
    w = from_sokolskii(res.generators[1], 6)
    # old = new + eps^2/2 {new, W_2}
    shifts = [compile_polynomial(bracket_z(z, w), 0.0) for z in Jet.gens(6, Z_VARS)]

    def to_old(y):
        return tuple(y[i] + eps**2 / 2 * shifts[i](*y) for i in range(4))

    y0 = (0.3, -0.2, 0.5, 0.4)
    assert abs(compile_polynomial(h, eps)(*to_old(y0)) - compile_polynomial(k, eps)(*y0)) < eps**3
    f_old = compile_field(hamiltonian_vector_field(h), eps)
    f_new = compile_field(hamiltonian_vector_field(k), eps)
    _, xs = _rk4(f_old, to_old(y0), 1e-3, 10.0, 50)
    _, ys = _rk4(f_new, y0, 1e-3, 10.0, 50)

    def theta(z):
        return z[1] * z[2] - z[0] * z[3]

    def r2(z):
        return z[2] ** 2 + z[3] ** 2

    for x, y in zip(xs, ys):
        yo = to_old(y)
        assert abs(theta(x) - theta(yo)) <= 10 * eps**3
        assert abs(r2(x) - r2(yo)) <= 10 * eps**3
