import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cylinder_group, rank_two_group
from schottky_lab.errors import DomainError
from schottky_lab.schottky import primitive_geodesics
from schottky_lab.trace import (
    TestFunction, bump, bump_integral, cylinder_resonances, fit_envelope, geometric_side, phi_hat,
    spectral_side, tail_bound, trace_report,
)
from schottky_lab.zeta import ORIENTATIONS

CYL = cylinder_group()
GROUP = rank_two_group()
TF = TestFunction(0.3, 4.0)


@pytest.fixture(scope="module")
def cylinder_reports():
    return {R: trace_report(CYL, TF, R, cylinder_resonances(2.0, R)) for R in (100, 200, 400)}


def test_bump_shape():
    assert bump(0.0) == 1.0
    t = np.linspace(-1.5, 1.5, 301)
    v = bump(t)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(v[np.abs(t) >= 1] == 0)


def test_test_function_validation():
    with pytest.raises(DomainError):
        TestFunction(0.5, 0.4)
    with pytest.raises(DomainError):
        TestFunction(0.0, 1.0)
    assert TestFunction(0.2, 3.0).support == (2.8, 3.2)


def test_bump_integral_oracle():
    ref = float(mp.quad(lambda t: mp.exp(1 - 1 / (1 - t * t)), [-1, 0, 1]))
    assert bump_integral() == pytest.approx(ref, rel=1e-12)
    assert bump_integral() == pytest.approx(1.2069003224378763, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.02, 0.3, 1.0])
def test_phi_hat_at_zero(alpha):
    tf = TestFunction(alpha, 4.0)
    assert phi_hat(tf, 0.0).real == pytest.approx(alpha * bump_integral(), rel=1e-12)


@pytest.mark.parametrize("z", [0.0, 3.0 + 0.5j, -20.0 + 2j, 150.0])
def test_phi_hat_node_doubling(z):
    assert abs(phi_hat(TF, z, 256) - phi_hat(TF, z, 512)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(0, 3))
def test_phi_hat_decay_envelope(x, y):
    z = complex(x, y)
    C = fit_envelope(TF, 2)
    bound = TF.alpha * C * math.exp(-TF.d * y + TF.alpha * y) / (1 + TF.alpha * abs(z)) ** 2
    assert abs(phi_hat(TF, -z)) <= bound * (1 + 1e-9)


@given(st.floats(-30, 30), st.floats(-2, 2))
def test_phi_hat_conjugation(x, y):
    # phi is real, so phi_hat(-conj z) = conj phi_hat(z)
    z = complex(x, y)
    assert abs(phi_hat(TF, -np.conj(z)) - np.conj(phi_hat(TF, z))) < 1e-12


def test_geometric_empty_support():
    spectrum = primitive_geodesics(GROUP, 4.0)
    tf = TestFunction(0.3, 3.6)  # no multiple of 2.634 or 4.956 in [3.3, 3.9]
    geo, topo = geometric_side(tf, spectrum, -1)
    assert geo == 0.0 and topo < 0


def test_geometric_single_term():
    ell = 2 * np.arccosh(2.0)
    spectrum = primitive_geodesics(GROUP, ell + 0.1)
    geo, _ = geometric_side(TestFunction(0.02, ell), spectrum, -1)
    expected = ORIENTATIONS * ell * np.exp(-ell / 2) / (2 * (1 - np.exp(-ell)))
    assert geo == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("d", [8.0, 12.0, 16.0])
def test_topological_term_order_alpha(d):
    tf = TestFunction(0.3, d)
    _, topo = geometric_side(tf, primitive_geodesics(GROUP, d + 0.3), -1)
    t = d - tf.alpha
    g_max = np.cosh(t / 2) / (2 * np.sinh(t / 2)) ** 2
    assert 0 < -topo <= tf.alpha * bump_integral() * g_max


def test_geometric_needs_complete_spectrum():
    spectrum = primitive_geodesics(GROUP, 5.0, max_word_len=1)
    with pytest.raises(DomainError):
        geometric_side(TestFunction(0.3, 6.0), spectrum, -1)


def test_spectral_side_empty():
    res, dk, tail = spectral_side(TF, [], (), 60.0)
    assert res == 0 and dk == 0 and tail == 0


def test_tail_bound_drops_tenfold():
    a = tail_bound(TF, 200.0, 1.0)
    b = tail_bound(TF, 400.0, 1.0)
    assert b <= a / 10


def test_cylinder_lattice_enumeration():
    hits = cylinder_resonances(2.0, 10.0)
    assert all(h.multiplicity == ORIENTATIONS for h in hits)
    for h in hits:
        assert abs(h.lam.real - round(h.lam.real)) < 1e-15
        assert abs(h.lam.imag / np.pi - round(h.lam.imag / np.pi)) < 1e-12
        assert abs(h.lam - 0.5) <= 10.0


def test_cylinder_closure(cylinder_reports):
    rep = cylinder_reports[400]
    assert rep.informative
    assert rep.rel_discrepancy <= 2e-2
    assert abs(rep.resonance_imag) <= 1e-10


def test_discrepancy_decreases_with_cutoff(cylinder_reports):
    rel = [cylinder_reports[R].rel_discrepancy for R in (100, 200, 400)]
    assert rel[0] > rel[1] > rel[2]


def test_off_spectrum_cylinder():
    # d = 3 lies between l0 = 2 and 2 l0 = 4, and chi = 0: the geometric side vanishes
    tf = TestFunction(0.3, 3.0)
    rep = trace_report(CYL, tf, 400, cylinder_resonances(2.0, 400))
    assert rep.geometric == 0.0
    assert abs(rep.spectral) <= rep.tail_bound


def test_dk_contribution_negligible_far_out():
    tf = TestFunction(0.3, 8.0)
    _, dk, _ = spectral_side(tf, [], (1.0, 1.0, 1.0), 60.0)
    assert abs(dk) <= np.exp(-8.0 + 0.3) * 3
