from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from sokolskii.exactalg import Jet, Scalar, Y_VARS, Z_VARS, monomials

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=12)
scalars = st.builds(Scalar, small_fracs, small_fracs)
nonzero_scalars = scalars.filter(bool)

_MONOS = [e for e in monomials(4, 4)]


@st.composite
def jets(draw, max_degree=4, variables=Y_VARS, min_degree=0, max_terms=6):
    monos = [e for e in _MONOS if min_degree <= sum(e) <= max_degree]
    keys = draw(st.lists(st.sampled_from(monos), max_size=max_terms, unique=True))
    return Jet({e: draw(scalars) for e in keys}, max_degree, variables)


def z_jets(**kw):
    return jets(variables=Z_VARS, **kw)


@pytest.fixture(scope="session")
def pipeline_chain():
    """The derivation chain run once: (H_yp, H_z, scaled, sokolskii)."""
    from sokolskii.model import build_hamiltonian
    from sokolskii.poisson import to_sokolskii
    from sokolskii.scaling import blowup
    from sokolskii.symplin import STANDARDIZING_P, transform_jet

    h = build_hamiltonian()
    hz = transform_jet(h, STANDARDIZING_P)
    scaled = blowup(hz)
    return h, hz, scaled, to_sokolskii(scaled)


HALF = Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts, one line per criterion."""
    import sys

    mod = next((m for n, m in sys.modules.items() if n.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
