import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cylinder_group, rank_two_group
from schottky_lab.errors import DomainError
from schottky_lab.schottky import SchottkyGroup, periodic_words, primitive_geodesics
from schottky_lab.zeta import (
    CountingReport, PeriodicData, TransferDeterminant, counting_census, cycle_profile, cyclic_word_count,
    find_resonances, find_zeros, strip_count, winding_on_circle, with_numeric_derivative, zeta_cycle,
    zeta_cycle_log, zeta_dirichlet, zeta_real_root,
)

GROUP = rank_two_group()
CYL = cylinder_group()

# first resonances of the rank-two group (upper half plane), located by the rectangle search
FROZEN_RESONANCES = [
    -0.05150829436344168 + 1.1168440279877234j,
    0.18184892804163286 + 1.3385951223013164j,
    0.29913097411170525 + 2.316859866983399j,
    0.006852351166183932 + 2.3869355270392374j,
    -0.8827856922666372 + 0.565506269523462j,
]


def cylinder_product(lam, K=60):
    # both orientations of the single geodesic of length 2
    k = np.arange(K + 1)
    return np.prod(1 - np.exp(-2 * (lam + k))) ** 2


@pytest.fixture(scope="module")
def transfer():
    return TransferDeterminant(GROUP, 64)


@pytest.fixture(scope="module")
def spectrum30():
    return primitive_geodesics(GROUP, 30.0)


def test_dirichlet_cylinder_product():
    spectrum = primitive_geodesics(CYL, 3.0)
    v = zeta_dirichlet(1.0, spectrum, 80, 0.0)
    assert abs(v.value - cylinder_product(1.0)) <= 1e-12


def test_dirichlet_far_right_tends_to_one(spectrum30):
    v = zeta_dirichlet(10.0, spectrum30, 20, 0.3206)
    assert abs(v.value - 1) <= max(v.truncation_bound, 1e-12) + 1e-10
    assert abs(v.value - 1) < 1e-10


def test_dirichlet_refuses_divergent_region(spectrum30):
    with pytest.raises(DomainError):
        zeta_dirichlet(0.33, spectrum30, 20, 0.3206)


def test_dirichlet_matches_cycle_at_point_nine(spectrum30):
    d = zeta_dirichlet(0.9, spectrum30, 40, 0.3206)
    c = zeta_cycle(0.9, GROUP, 14)
    assert abs(d.value - c.value) <= 1e-8
    assert abs(d.value - c.value) <= d.truncation_bound


@pytest.mark.parametrize("lam", [1.0, 0.3 + 2j, -1.3 + 4.1j, -2.4 - 9.0j])
def test_cycle_cylinder_is_exact_product(lam):
    v = zeta_cycle(lam, CYL, 14).value
    assert abs(v - cylinder_product(lam)) <= 1e-10 * max(1.0, abs(v))


def test_cycle_log_consistent_with_value():
    lam = -0.7 + 2.2j
    logv, dlog = zeta_cycle_log(lam, CYL)
    assert np.exp(logv) == pytest.approx(zeta_cycle(lam, CYL).value, rel=1e-12)
    h = 1e-6
    fd = (zeta_cycle(lam + h, CYL).value - zeta_cycle(lam - h, CYL).value) / (2 * h)
    assert dlog == pytest.approx(fd / zeta_cycle(lam, CYL).value, rel=1e-6)


@pytest.mark.parametrize("lam", [0.9, 1.5, 0.4206 + 5j, 0.6 - 2j])
def test_transfer_matches_cycle_right_of_delta(transfer, lam):
    assert abs(transfer.value(lam).value - zeta_cycle(lam, GROUP, 14).value) <= 1e-10


@pytest.mark.parametrize("lam", [-0.5 + 1j, -1.5 + 3j, 0.1 + 6j])
def test_transfer_converged_in_nodes(transfer, lam):
    fine = TransferDeterminant(GROUP, 96).value(lam).value
    assert abs(transfer.value(lam).value - fine) <= 1e-8 * max(1.0, abs(fine))


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(0.1, 6.0))
def test_reality_symmetry(x, y):
    T = TransferDeterminant(GROUP, 48)
    v, w = T.value(complex(x, y)).value, T.value(complex(x, -y)).value
    assert abs(v - np.conj(w)) <= 1e-10 * max(1.0, abs(v))


def test_cycle_invariant_under_relabeling():
    swapped = SchottkyGroup.from_disk_pairs([(-6, 1, 6, 1), (-2, 1, 2, 1)])
    lam = 0.4 + 2j
    assert abs(zeta_cycle(lam, GROUP, 12).value - zeta_cycle(lam, swapped, 12).value) <= 1e-10


def test_cycle_profile_superexponential():
    p = cycle_profile(0.9, PeriodicData.build(GROUP, 12))
    n = np.arange(1, len(p) + 1)
    assert np.polyfit(n, p, 2)[0] < 0  # concave trend in N
    assert p[-1] < p[0] - 15


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_cyclic_word_count(k):
    codes, _ = periodic_words(GROUP, k)
    assert len(codes) == cyclic_word_count(2, k)


def test_real_root_frozen():
    assert zeta_real_root(GROUP) == pytest.approx(0.32060444439383434, abs=1e-12)


def test_simple_zero_at_delta(transfer):
    d = zeta_real_root(GROUP)
    assert round(winding_on_circle(transfer.evaluate, d, 0.02)) == 1


@pytest.mark.parametrize("lam", FROZEN_RESONANCES)
def test_frozen_resonances_are_zeros(lam):
    # fresh discretization, finer than the one used in the search
    T = TransferDeterminant(GROUP, 80)
    _, dlog = T.evaluate(lam)
    assert abs(1 / dlog) < 1e-8
    assert round(winding_on_circle(T.evaluate, lam, 1e-3)) == 1


def test_find_zeros_polynomial_multiplicities():
    roots = {0.3 + 0.2j: 1, -0.4 + 0.55j: 2, 0.1 - 0.3j: 3}
    f = lambda z: np.prod([(z - r) ** m for r, m in roots.items()])
    evaluate = lambda z: (complex(np.log(f(z))), sum(m / (z - r) for r, m in roots.items()))
    hits, total, _ = find_zeros(evaluate, (-1, 1, -1, 1), 0.1)
    assert total == 6
    assert sum(h.multiplicity for h in hits) == total
    found = {complex(np.round(h.lam, 6)): h.multiplicity for h in hits}
    for r, m in roots.items():
        match = [k for k in found if abs(k - r) < 1e-6]
        assert len(match) == 1 and found[match[0]] == m


def test_numeric_derivative_finds_simple_zeros():
    roots = [0.3 + 0.2j, -0.4 + 0.55j, 0.1 - 0.3j]
    evaluate = with_numeric_derivative(lambda z: complex(np.log(np.prod([z - r for r in roots]))))
    hits, total, finder = find_zeros(evaluate, (-1, 1, -1, 1), 0.1)
    assert total == 3 and not finder.failures
    np.testing.assert_allclose(np.sort_complex([h.lam for h in hits]), np.sort_complex(roots), atol=1e-9)


def test_zero_at_origin_is_masked():
    keep, masked = find_resonances(GROUP, (-0.2, 0.1, -0.3, 0.3), return_masked=True)
    assert keep == []
    assert len(masked) == 1 and abs(masked[0].lam) < 1e-8


def test_rect_edge_near_excluded_point_rejected():
    with pytest.raises(DomainError):
        find_resonances(GROUP, (-1.0005, 0.1, -0.5, 0.5))
    with pytest.raises(DomainError):
        find_resonances(GROUP, (-0.5, 0.1, 0.0, 1.0))


def test_small_window_search_matches_frozen():
    hits = find_resonances(GROUP, (-0.1, 0.25, 1.0, 1.5))
    got = sorted(h.lam for h in hits)
    assert len(got) == 2
    np.testing.assert_allclose(got, sorted(FROZEN_RESONANCES[:2], key=lambda z: z.real), atol=1e-9)


def test_census_monotone_and_cylinder_slope():
    lam = [complex(-k, np.pi * j) for k in range(3) for j in range(-3, 4)]

    class Hit:
        def __init__(self, z):
            self.lam, self.multiplicity = z, 2

    rep = counting_census([Hit(z) for z in lam], 0.0, 0.2, radii=list(np.geomspace(1.0, 10.0, 8)))
    assert all(b >= a for a, b in zip(rep.counts, rep.counts[1:]))
    assert abs(rep.fitted_exponents[1] - 1) <= 0.3


def test_counting_report_rejects_decreasing():
    with pytest.raises(DomainError):
        CountingReport([1, 2], [3, 2], [0, 0], (1.0, 1.0))


def test_strip_count():
    class Hit:
        def __init__(self, z, m=1):
            self.lam, self.multiplicity = z, m

    hits = [Hit(-0.1 + 1j), Hit(0.5 + 2j), Hit(-0.1 + 40j), Hit(-0.2 + 3j, 2)]
    assert strip_count(hits, -0.3, 0.3, 30) == 3
