import math

import numpy as np
import pytest

import partfn


def test_roundtrip_and_geometry():
    H = partfn.random_instance("chain", 6, -1.0, 1.0, 7)
    text = H.serialize()
    H2 = partfn.LocalHamiltonian.parse(text)
    assert H2.serialize() == text
    assert partfn.instance_hash(H2) == partfn.instance_hash(H)
    gp = partfn.geometry_params(H)
    assert gp.kappa == 2
    assert gp.m == 11


def test_moments_match_spectrum():
    H = partfn.random_instance("graph", 5, -1.0, 1.0, 9)
    S = partfn.spectrum(H, keep_basis=False)
    energies = np.asarray(S.energies)
    for k in range(6):
        want = float(np.sum(energies**k))
        got = partfn.trace_moment(H, k)
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_estimate_within_certificate():
    H = partfn.random_instance("chain", 6, -1.0, 1.0, 3)
    b0 = partfn.beta0(partfn.geometry_params(H))
    beta = 0.5 * b0
    est = partfn.estimate_log_partition(H, beta, 1e-6)
    exact = partfn.log_partition_real(partfn.spectrum(H, keep_basis=False), beta)
    assert est.certified_error <= 1e-6
    assert abs(est.value - exact) <= est.certified_error + 1e-12
    with pytest.raises(partfn.NoCertificateError):
        partfn.estimate_log_partition(H, 10.0 * b0, 1e-6)


def test_fisher_zero_of_a_free_qubit():
    term = partfn.LocalTerm([0], partfn.pauli_string_matrix("Z"))
    H = partfn.LocalHamiltonian(1, 2, [partfn.Site(0)], [term])
    S = partfn.spectrum(H)
    zeros, grid = partfn.fisher_zero_scan(S, -0.5, 0.5, 0.5, 2.5, 21, 41, return_grid=True)
    assert len(zeros) == 1
    assert abs(zeros[0].location - 1j * math.pi / 2) < 1e-9
    assert len(grid) == 21 * 41


def test_cluster_bounds():
    H = partfn.random_instance("chain", 5, 0.2, 1.0, 5)
    gp = partfn.geometry_params(H)
    assert partfn.beta0(gp) > 0
    assert partfn.expansion_radius(gp) > partfn.beta0(gp)
    report = partfn.ratio_bound_check(H, 0.5 * partfn.beta0(gp))
    assert report.within_domain
    assert report.all_ok


def test_covariance_cancellation():
    H = partfn.random_instance("chain", 5, 0.2, 1.0, 5)
    z0 = partfn.LocalTerm([0], partfn.pauli_string_matrix("Z"))
    z3 = partfn.LocalTerm([3], partfn.pauli_string_matrix("Z"))
    cs = partfn.covariance_series(H, z0, z3, 8)
    assert cs.L_predicted == 3
    assert cs.vanishing_order >= 3
    assert abs(cs.series.coeffs[0]) <= 1e-12


def test_xxz_circle_and_estimate():
    inst = partfn.random_ferromagnetic_xxz(6, 11)
    assert partfn.check_ferromagnetic(inst).ferromagnetic
    poly = partfn.sector_coefficients(inst, 1.0)
    assert len(poly.q) == 7
    assert partfn.lee_yang_roots(poly).max_deviation <= 1e-8
    est = partfn.xxz_estimate(poly, 0.5, 1e-8)
    exact = math.log(float(np.polyval(poly.q[::-1], 0.5)))
    assert abs(est.value - exact) <= est.certified_error + 1e-12
    assert est.certified_error <= 1e-8
