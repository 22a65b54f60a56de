import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.integrate import trapezoid
from scipy.linalg import svdvals

from dicke_ising import ed
from dicke_ising.errors import DimensionBudgetExceeded, KrylovBreakdown
from dicke_ising.model import ModelParams
from dicke_ising.validate import dense_hamiltonian, lehmann_propagator

J = 0.25


def spin_flip_operator(n_spins, n_max):
    """prod sigma^x in the photon-major basis, as a dense matrix."""
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = np.eye(1)
    for _ in range(n_spins):
        out = np.kron(out, sx)
    return np.kron(np.eye(n_max + 1), out)


def photon_parity_times(op_2x2, n_spins, n_max):
    out = np.eye(1)
    for _ in range(n_spins):
        out = np.kron(out, op_2x2)
    return np.kron(np.diag((-1.0) ** np.arange(n_max + 1)), out)


def green(cfg, w, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KrylovBreakdown)
        return ed.photon_green_function(cfg, w, **kw)


@pytest.mark.parametrize("boundary", ["open", "periodic"])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_hamiltonian_matches_pauli_build(n, boundary):
    p = ModelParams(omega_x=0.37, J=J, lam=0.29, Omega=1.1)
    cfg = ed.EDConfig(p, n, n_max=5, boundary=boundary)
    H, _ = dense_hamiltonian(p, n, 5, boundary)
    assert np.abs(ed.build_hamiltonian(cfg).toarray() - H).max() < 1e-13
    sector = np.concatenate([np.linalg.eigvalsh(ed.build_hamiltonian(cfg, s).toarray())
                             for s in cfg.sectors()])
    assert np.allclose(np.sort(sector), np.linalg.eigvalsh(H), atol=1e-12, rtol=0)


def test_sparsity_per_row():
    n = 6
    cfg = ed.EDConfig(ModelParams(omega_x=0.3, J=J, lam=0.2), n, n_max=8, use_parity=False)
    H = ed.build_hamiltonian(cfg)
    assert np.diff(H.indptr).max() <= 3 * n + 1


def test_hermiticity_random_vectors():
    rng = np.random.default_rng(3)
    cfg = ed.EDConfig(ModelParams(omega_x=0.4, J=J, lam=0.3), 6, n_max=10)
    for parity in (None, 1, -1):
        H = ed.build_hamiltonian(cfg, parity)
        u, v = rng.normal(size=(2, H.shape[0]))
        lhs, rhs = u @ (H @ v), (H @ u) @ v
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)
        assert abs(H - H.T).max() == 0


def test_spin_flip_is_a_symmetry_at_any_field():
    n, nm = 4, 4
    H, _ = dense_hamiltonian(ModelParams(omega_x=0.4, J=J, lam=0.3), n, nm)
    P = spin_flip_operator(n, nm)
    assert np.abs(H @ P - P @ H).max() < 1e-13


def test_photon_parity_symmetry_at_zero_field():
    n, nm = 4, 4
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    Pz = photon_parity_times(sz, n, nm)
    Px = photon_parity_times(sx, n, nm)
    H0, _ = dense_hamiltonian(ModelParams(omega_x=0.0, J=J, lam=0.3), n, nm)
    H1, _ = dense_hamiltonian(ModelParams(omega_x=0.2, J=J, lam=0.3), n, nm)
    assert np.abs(H0 @ Pz - Pz @ H0).max() < 1e-13
    assert np.abs(H1 @ Pz - Pz @ H1).max() > 1e-3
    # photon parity with the spin flip anticommutes with the coupling term
    assert np.abs(H0 @ Px - Px @ H0).max() > 1e-3
    E, V = np.linalg.eigh(H0)
    parities = np.einsum("ij,ik,kj->j", V, Pz, V)
    nondeg = np.flatnonzero(np.min(np.abs(E[:, None] - E[None, :]) + np.eye(E.size) * 9, axis=1) > 1e-8)
    assert np.allclose(np.abs(parities[nondeg]), 1.0, atol=1e-10)


def test_sector_eigenvectors_have_definite_spin_flip_parity():
    n, nm = 4, 6
    p = ModelParams(omega_x=0.3, J=J, lam=0.25)
    cfg = ed.EDConfig(p, n, n_max=nm, n_eigen=3)
    res = ed.ground_state(cfg)
    P = spin_flip_operator(n, nm)
    half = 2 ** (n - 1)
    for q, s in res.sectors.items():
        for vec in s.vectors.T:
            # lift the sector vector to the full basis
            psi = vec.reshape(nm + 1, half) / np.sqrt(2)
            full = np.concatenate([psi, q * psi[:, ::-1]], axis=1).ravel()
            assert np.linalg.norm(P @ full - q * full) < 1e-10


def test_uncoupled_chain_is_free_fermions():
    n = 8
    for wx in (0.1, 0.6):
        cfg = ed.EDConfig(ModelParams(omega_x=wx, J=J, lam=0.0), n, n_max=2)
        M = np.diag(np.full(n, wx)) + np.diag(np.full(n - 1, 2 * J), 1)
        assert ed.ground_state(cfg).ground_energy == pytest.approx(-0.5 * svdvals(M).sum(), abs=1e-12)


def test_parity_sectors_do_not_change_spectrum():
    p = ModelParams(omega_x=0.2, J=J, lam=0.3)
    a = ed.ground_state(ed.EDConfig(p, 6, n_max=12, n_eigen=4))
    b = ed.ground_state(ed.EDConfig(p, 6, n_max=12, n_eigen=4, use_parity=False))
    assert np.allclose(a.energies, b.energies, atol=1e-10)
    assert a.observables["n_ph"] == pytest.approx(b.observables["n_ph"], abs=1e-8)


def test_photon_cutoff_convergence():
    p = ModelParams(omega_x=0.2, J=J, lam=0.3)
    a = ed.ground_state(ed.EDConfig(p, 6, n_max=10))
    b = ed.ground_state(ed.EDConfig(p, 6, n_max=20))
    assert a.ground_energy == pytest.approx(b.ground_energy, abs=1e-10)
    assert b.tail_weight < 1e-8 and b.cutoff_adequate


def test_observables_against_dense_expectations():
    n, nm = 4, 8
    p = ModelParams(omega_x=0.3, J=J, lam=0.3)
    res = ed.ground_state(ed.EDConfig(p, n, n_max=nm))
    H, a_full = dense_hamiltonian(p, n, nm)
    g = np.linalg.eigh(H)[1][:, 0]
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    X = sum(np.kron(np.eye(nm + 1), np.kron(np.kron(np.eye(2**j), sx), np.eye(2 ** (n - j - 1))))
            for j in range(n))
    assert res.observables["m_x"] == pytest.approx(g @ X @ g / n, abs=1e-10)
    assert res.observables["n_ph"] == pytest.approx(g @ a_full.T @ a_full @ g / n, abs=1e-10)


def test_superradiant_zero_field_reports_both_sectors():
    p = ModelParams(omega_x=0.0, J=J, lam=1.2)
    res = ed.ground_state(ed.EDConfig(p, 6, n_max=60))
    assert res.degenerate
    assert set(res.sector_observables) == {1, -1}
    assert res.cutoff_adequate
    # z-ordered normal phase: the doublet sits across the spin-flip sectors instead
    res = ed.ground_state(ed.EDConfig(p.replace(lam=0.1), 10, n_max=10))
    assert res.degenerate and abs(res.sector_observables[1]["zz"] - 1) < 1e-2


@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_green_function_matches_lehmann(boundary):
    p = ModelParams(omega_x=0.3, J=J, lam=0.35, eta=0.03)
    cfg = ed.EDConfig(p, 4, n_max=6, boundary=boundary)
    w = np.linspace(-2.5, 3.0, 601)
    H, a_full = dense_hamiltonian(p, 4, 6, boundary)
    ref = lehmann_propagator(H, a_full, w, p.eta)
    assert np.abs(green(cfg, w).D - ref).max() < 1e-8


def test_pole_weights_sum_to_truncated_commutator():
    n, nm = 4, 6
    p = ModelParams(omega_x=0.3, J=J, lam=0.35, eta=0.03)
    cfg = ed.EDConfig(p, n, n_max=nm)
    s = green(cfg, np.linspace(0, 1, 3))
    H, a_full = dense_hamiltonian(p, n, nm)
    g = np.linalg.eigh(H)[1][:, 0]
    comm = a_full @ a_full.T - a_full.T @ a_full
    assert s.weights.sum() == pytest.approx(g @ comm @ g, abs=1e-10)


def test_spectral_weight_on_wide_grid():
    p = ModelParams(omega_x=0.2, J=J, lam=0.3, eta=5e-3)
    cfg = ed.EDConfig(p, 6, n_max=24)
    w = np.linspace(-30, 30, 120001)
    s = green(cfg, w)
    assert trapezoid(s.spectrum, w) == pytest.approx(1.0, abs=0.01)
    pos = w >= 0
    assert np.all(s.spectrum[pos] >= 0)


def test_lanczos_and_continued_fraction_against_resolvent():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(60, 60))
    H = sp.csr_matrix(A + A.T)
    v = rng.normal(size=60)
    alpha, beta, norm, breakdown = ed.lanczos(H, v, 60)
    assert norm == pytest.approx(np.linalg.norm(v)) and not breakdown
    z = np.array([0.3 + 0.1j, -2.0 + 0.5j, 11.0 + 0.01j])
    ref = [v @ np.linalg.solve(zz * np.eye(60) - H.toarray(), v) / norm**2 for zz in z]
    assert np.allclose(ed.continued_fraction(z, alpha, beta), ref, rtol=1e-10)


def test_lanczos_breakdown_on_invariant_subspace():
    H = sp.diags([1.0, 2.0, 3.0, 4.0]).tocsr()
    _, _, _, breakdown = ed.lanczos(H, np.array([1.0, 1.0, 0.0, 0.0]), 4)
    assert breakdown


def test_config_validation():
    p = ModelParams()
    with pytest.raises(DimensionBudgetExceeded):
        ed.EDConfig(p, 20, n_max=40)
    with pytest.raises(ValueError):
        ed.EDConfig(p, 4, boundary="twisted")
    assert ed.EDConfig(p, 1).sectors() == (None,)


def test_finite_size_scan_shapes():
    p = ModelParams(omega_x=0.0, J=J, eta=0.02)
    w = np.linspace(0, 2, 51)
    scan = ed.finite_size_scan(ed.EDConfig(p, 2, n_max=10), [2, 4], [0.1, 0.2], w, 0.5, 0.15)
    assert scan.maps[4].shape == (51, 2)
    assert scan.pole_weight.shape == (2, 2)
    single = ed.photon_spectrum(ed.EDConfig(p.replace(lam=0.2), 4, n_max=10), w)
    assert np.array_equal(scan.maps[4][:, 1], single.photon_spectrum.spectrum)
