import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nopoblockade import fock
from nopoblockade.fock import build_space, compose, number, swap_bc_defect
from nopoblockade.liouvillian import liouvillian
from nopoblockade.model import SystemParams
from nopoblockade.observables import (CORRELATION_FIELDS, CorrelationReport, auto_g2,
                                      cross_g2, expectation, pair_operator, report)
from nopoblockade.steady import steady_state


@pytest.fixture(scope="module")
def reference_state(reference_point, default_space):
    return steady_state(liouvillian(default_space, reference_point))


def random_single_mode_state(dim, rng):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


def test_expectation_basics(default_space, reference_state):
    s = default_space
    assert expectation(s.projector(0, 0, 0), number(s, "b")) == 0
    assert expectation(s.projector(1, 0, 0), number(s, "a")) == 1
    for mode in fock.MODES:
        assert abs(expectation(reference_state, number(s, mode)).imag) <= 1e-12
    with pytest.raises(ValueError):
        expectation(np.eye(3), number(s, "a"))


def test_pair_operator_on_kets():
    s = build_space((1, 2, 2))
    D = pair_operator(s)
    assert np.allclose(D @ s.basis(0, 1, 1), s.basis(0, 0, 0), atol=0)
    assert np.allclose(D @ s.basis(0, 2, 2), 2 * s.basis(0, 1, 1), atol=1e-15)
    assert np.abs(D @ s.basis(1, 1, 0)).max() == 0


def test_auto_g2_of_fock_states():
    s = build_space((3, 1, 1))
    a = fock.annihilation(s, "a")
    assert auto_g2(s.projector(2, 0, 0), a) == pytest.approx(0.5, abs=1e-15)
    assert auto_g2(s.projector(1, 0, 0), a) == 0
    assert auto_g2(s.projector(0, 0, 0), a) is None


def test_cross_g2_of_product_state():
    rng = np.random.default_rng(4)
    s = build_space((2, 3, 3))
    parts = [random_single_mode_state(d, rng) for d in s.dims]
    rho = np.kron(np.kron(parts[0], parts[1]), parts[2])
    ops = {m: fock.annihilation(s, m) for m in fock.MODES}
    for x, y in (("a", "b"), ("b", "c"), ("a", "c")):
        assert cross_g2(rho, ops[x], ops[y]) == pytest.approx(1.0, abs=1e-12)


def test_cross_g2_of_pair_state():
    s = build_space((1, 2, 2))
    rho = s.projector(0, 1, 1)
    assert cross_g2(rho, fock.annihilation(s, "b"), fock.annihilation(s, "c")) == 1.0
    assert cross_g2(rho, fock.annihilation(s, "a"), fock.annihilation(s, "c")) is None


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
@settings(max_examples=20, deadline=None)
def test_auto_g2_scale_invariant(factor):
    rng = np.random.default_rng(5)
    s = build_space((2, 2, 2))
    parts = [random_single_mode_state(d, rng) for d in s.dims]
    rho = np.kron(np.kron(parts[0], parts[1]), parts[2])
    D = pair_operator(s)
    assert auto_g2(rho, D * factor) == pytest.approx(auto_g2(rho, D), rel=1e-10)


def test_pair_number_two_routes(default_space, reference_state):
    s = default_space
    D = pair_operator(s)
    DdD = compose(D.conj().T, D)
    nbnc = compose(number(s, "b"), number(s, "c"))
    assert np.abs((DdD - nbnc).toarray()).max() <= 1e-13
    via_pair = expectation(reference_state, DdD).real
    via_numbers = expectation(reference_state, nbnc).real
    assert abs(via_pair - via_numbers) <= 1e-12


def test_vacuum_report(default_space):
    r = report(default_space.projector(0, 0, 0), default_space)
    assert r.n_D == 0 and r.n_a == 0
    for name in CORRELATION_FIELDS:
        assert getattr(r, name) is None
        assert r.flags[name] == "undefined"


def test_report_matches_individual_operations(default_space, reference_state):
    s = default_space
    r = report(reference_state, s)
    assert r.g2_D == pytest.approx(auto_g2(reference_state, pair_operator(s)), rel=1e-12)
    b, c = fock.annihilation(s, "b"), fock.annihilation(s, "c")
    assert r.g2_bc == pytest.approx(cross_g2(reference_state, b, c), rel=1e-12)
    assert all(getattr(r, f) >= 0 for f in CORRELATION_FIELDS)


def test_report_exchange_symmetry(default_space, reference_state):
    assert swap_bc_defect(reference_state, default_space) < 1e-8
    r = report(reference_state, default_space)
    # ratio of ~1e-10 numerators: LU round-off limits agreement to ~1e-6
    assert r.g2_b == pytest.approx(r.g2_c, rel=1e-5)
    assert r.n_b == pytest.approx(r.n_c, rel=1e-10)
    assert r.g2_ab == pytest.approx(r.g2_ac, rel=1e-8)


def test_report_rejects_placeholders():
    with pytest.raises(ValueError):
        CorrelationReport(n_D=math.nan)
    r = CorrelationReport(n_D=1e-4)
    assert r.flags["g2_D"] == "unavailable"
