"""Acceptance criteria, one test each, at the stated tolerances and time budgets.

Every test prints a single ``PASS``/``FAIL`` line (also collected into the
pytest terminal summary).  Run directly with ``python tests/test_acceptance.py``
for just the table.
"""
import time
import warnings

import numpy as np
import pytest
from scipy.integrate import trapezoid

from dicke_ising import ed, equilibrium, response
from dicke_ising.errors import KrylovBreakdown
from dicke_ising.model import EffectiveField, ModelParams, band_edges, bogoliubov_coupling, dispersion
from dicke_ising.validate import dense_hamiltonian, lehmann_propagator

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

J = 0.25  # 4J = Omega = 1 throughout


def report(number, title, ok, detail, seconds, budget):
    ok = bool(ok) and seconds < budget
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title} | {detail} | {seconds:.1f}s (< {budget:g}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def local_peaks(w, A, count):
    idx = np.flatnonzero((A[1:-1] > A[:-2]) & (A[1:-1] >= A[2:])) + 1
    return np.sort(w[idx[np.argsort(A[idx])[-count:]]])


def test_01_first_order_transition_at_zero_field():
    t0 = time.perf_counter()
    tr = equilibrium.classify_transition(ModelParams(omega_x=0.0, J=J), "lambda_sq", 0.0, 1.2 * J)
    dt = time.perf_counter() - t0
    loc = tr.location / J
    report(1, "first-order transition at omega_x = 0", tr.order == "first" and abs(loc - 0.837) <= 0.01,
           f"order={tr.order} lambda^2/(Omega J)={loc:.5f} target 0.837+-0.01 jump={tr.jump:.3f}", dt, 10)


def test_02_second_order_endpoint_without_cavity():
    t0 = time.perf_counter()
    tr = equilibrium.classify_transition(ModelParams(J=J, lam=0.0), "omega_x", 0.0, 4 * J)
    below = equilibrium.minimize(ModelParams(omega_x=tr.location - 1e-3 * J, J=J)).m_z
    dt = time.perf_counter() - t0
    loc = tr.location / J
    ok = tr.order == "second" and abs(loc - 2.0) <= 1e-3 and below < 0.6
    report(2, "m_z vanishes continuously at lambda = 0", ok,
           f"order={tr.order} omega_x/J={loc:.6f} target 2+-0.001 m_z(just below)={below:.3f}", dt, 5)


def test_03_tricritical_point():
    t0 = time.perf_counter()
    lsq, wx, tr = equilibrium.locate_tricritical(ModelParams(J=J), 0.5 * J, 1.9 * J)
    dt = time.perf_counter() - t0
    a, b = lsq / J, wx / J
    ok = abs(a - 0.225) <= 0.03 and abs(b - 1.427) <= 0.03
    report(3, "tricritical point", ok,
           f"(lambda^2/(Omega J), omega_x/J)=({a:.4f}, {b:.4f}) target (0.225, 1.427)+-0.03 "
           f"jump threshold {equilibrium.JUMP_THRESHOLD}", dt, 120)


def test_04_flat_band_closed_forms():
    t0 = time.perf_counter()
    p = ModelParams(J=J, lam=0.2, eta=1e-3)
    flat = EffectiveField(0.0)
    w = np.linspace(0.0, 3.0, 2000)
    z = w + 1j * p.eta
    rel = np.max(np.abs(response.chi0_integral(w, flat, p) - (-8 * J / (z * z - 16 * J * J)))
                 / np.abs(-8 * J / (z * z - 16 * J * J)))
    b, c = p.Omega**2 + 16 * J * J, 16 * J * J * p.Omega**2 - 16 * p.lam**2 * p.Omega * J
    roots = np.sqrt(np.sort(np.roots([1.0, -b, c]).real))
    wf = np.linspace(0.5, 1.5, 20001)
    peaks = local_peaks(wf, -response.photon_propagator(wf, flat, p).imag, 2)
    dev = np.max(np.abs(peaks - roots))
    dt = time.perf_counter() - t0
    report(4, "flat-band chi0 and polariton poles", rel <= 1e-8 and dev <= p.eta,
           f"chi0 rel err={rel:.1e} (<=1e-8); peaks={np.round(peaks, 5)} roots={np.round(roots, 5)} "
           f"max dev={dev:.1e} (<= eta)", dt, 5)


def test_05_bound_state_existence():
    t0 = time.perf_counter()
    p = ModelParams(omega_x=0.5, J=J, lam=0.2)
    sol = equilibrium.minimize(p)
    states = response.find_bound_states(sol.field, p)
    doubled = response.find_bound_states(sol.field, p, n_k=2 * p.n_k)
    sides = sorted(s.side for s in states)
    stable = len(states) == len(doubled) and all(
        abs(a.omega_b - b.omega_b) <= 1e-8 for a, b in zip(states, doubled))
    # below-band existence over random draws with the cavity above the lower edge
    rng = np.random.default_rng(2024)
    tested = missing = 0
    while tested < 40:
        q = ModelParams(omega_x=rng.uniform(0.0, 1.5), J=rng.uniform(0.1, 0.5), lam=rng.uniform(0.01, 0.6),
                        n_k=2048)
        s = equilibrium.minimize(q)
        if s.m_z == 0.0 and abs(s.omega_x_tilde) < 2 * q.J * (1 + 1e-9):
            continue
        try:
            edges = band_edges(s.field, q)
            if not q.Omega > edges.lower:
                continue
            found = response.find_bound_states(s.field, q)
        except Exception:
            continue
        tested += 1
        missing += not any(x.side == "below" for x in found)
    dt = time.perf_counter() - t0
    e = band_edges(sol.field, p)
    ok = sides == ["above", "below"] and stable and missing == 0
    report(5, "bound states below and above the band", ok,
           f"omega_x=0.5: band=[{e.lower:.4f}, {e.upper:.4f}] roots={[(s.side, round(s.omega_b, 6)) for s in states]} "
           f"stable={stable}; below-band root missing in {missing}/{tested} draws", dt, 10)


def test_06_finite_pair_sum_convergence():
    t0 = time.perf_counter()
    p = ModelParams(omega_x=0.5, J=J, lam=0.2, eta=1e-3)
    eff = equilibrium.minimize(p).field
    e = band_edges(eff, p)
    w = np.concatenate([np.linspace(0.0, e.lower - 0.02, 250), np.linspace(e.upper + 0.02, 2 * e.upper, 250)])
    ref = response.chi0_integral(w, eff, p)
    rel = np.max(np.abs(response.chi0_finite_sum(w, eff, p, 4096) - ref) / np.abs(ref))
    dt = time.perf_counter() - t0
    report(6, "finite pair sum N=4096 vs integral outside band", rel <= 1e-6, f"max rel err={rel:.2e} (<=1e-6)", dt, 30)


def test_07_ed_against_dense_oracles():
    t0 = time.perf_counter()
    p = ModelParams(omega_x=0.3, J=J, lam=0.3, eta=0.02)
    cfg = ed.EDConfig(p, 3, n_max=4, n_eigen=6)
    H, a_full = dense_hamiltonian(p, 3, 4)
    exact = np.linalg.eigvalsh(H)
    res = ed.ground_state(cfg)
    # sparse sector solver on all levels, and the reported low-lying ones
    sector = np.sort(np.concatenate([np.linalg.eigvalsh(ed.build_hamiltonian(cfg, s).toarray())
                                     for s in cfg.sectors()]))
    e_err = max(np.max(np.abs(sector - exact)), np.max(np.abs(res.energies - exact[:6])))
    w = np.linspace(-2.0, 3.0, 1001)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KrylovBreakdown)
        D = ed.photon_green_function(cfg, w, result=res).D
    g_err = np.max(np.abs(D - lehmann_propagator(H, a_full, w, p.eta)))
    dt = time.perf_counter() - t0
    report(7, "ED vs dense diagonalization and Lehmann sum", e_err <= 1e-12 and g_err <= 1e-8,
           f"eigenvalue err={e_err:.1e} (<=1e-12); Green fn err={g_err:.1e} (<=1e-8)", dt, 10)


EDGE = (0.3, 0.65)
LOWER = (0.65, 0.95)
UPPER = (1.05, 1.4)


def test_08_finite_size_edge_pole():
    t0 = time.perf_counter()
    p = ModelParams(omega_x=0.0, J=J, lam=0.2, eta=0.01)
    w = np.linspace(0.0, 2.0, 801)
    out = {}
    for n in (4, 14):
        res = ed.photon_spectrum(ed.EDConfig(p, n, n_max=20), w)
        s = res.photon_spectrum
        out[n] = (s.weight_in(*EDGE), s.weight_in(*LOWER), s.weight_in(*UPPER), res.tail_weight)
    dt = time.perf_counter() - t0
    (e4, l4, u4, t4), (e14, l14, u14, t14) = out[4], out[14]
    ok = e14 < e4 and l14 >= l4 and u14 >= u4 and max(t4, t14) < 1e-8
    report(8, "Omega/2 pole fades with N, polariton weights do not", ok,
           f"edge {e4:.4f}->{e14:.4f}; lower polariton {l4:.4f}->{l14:.4f}; upper polariton {u4:.4f}->{u14:.4f}; "
           f"sum of polaritons {l4 + u4:.4f}->{l14 + u14:.4f}; cutoff tail {max(t4, t14):.0e}", dt, 1800)


def test_09_polariton_fit_overlay():
    t0 = time.perf_counter()
    p = ModelParams(omega_x=0.0, J=J, eta=1e-3)
    lam_c = np.sqrt(equilibrium.classify_transition(p, "lambda_sq", 0.0, 1.2 * J).location * p.Omega)
    lams = np.linspace(0.02, 0.95 * lam_c, 12)
    w = np.linspace(0.0, 2.0, 20001)
    smap = response.spectral_map(lams, w, p)
    tol = max(p.eta, 0.01 * p.Omega)
    worst, worst_lam = 0.0, None
    for j, lam in enumerate(lams):
        fit = response.polariton_fit(p.replace(lam=float(lam)))
        peaks = local_peaks(w, smap.intensity[:, j], 2)
        dev = np.max(np.abs(peaks - [fit.omega_minus, fit.omega_plus]))
        if dev > worst:
            worst, worst_lam = dev, lam
    dt = time.perf_counter() - t0
    report(9, "spectral-map peaks vs two-oscillator fit", worst <= tol,
           f"{lams.size} couplings up to lambda={lams[-1]:.3f}; worst dev={worst:.4f} at lambda={worst_lam:.3f} "
           f"(tol {tol:g})", dt, 60)


def test_10_property_suites():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    fails = {"parity of eps/eta": 0, "sum rule D": 0, "sum rule ED": 0, "Im D <= 0": 0,
             "Hermiticity": 0, "parity commutation": 0}
    worst_sum = 0.0
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.diag([1.0, -1.0])
    w_pos = np.linspace(0.0, 3.0, 1501)
    w_all = np.linspace(-40.0, 40.0, 20001)
    for draw in range(100):
        p = ModelParams(omega_x=rng.uniform(0.0, 1.0), J=rng.uniform(0.1, 0.5), lam=rng.uniform(0.0, 0.6),
                        eta=rng.uniform(0.02, 0.05), n_k=256)
        sol = equilibrium.minimize(p)
        eff = sol.field
        k = rng.uniform(-np.pi, np.pi, 64)
        if not np.allclose(dispersion(k, eff, p), dispersion(-k, eff, p), rtol=0, atol=0):
            fails["parity of eps/eta"] += 1
        if not np.array_equal(bogoliubov_coupling(k, eff, p), -bogoliubov_coupling(-k, eff, p)):
            fails["parity of eps/eta"] += 1
        g = response.response_grid(w_all, p, solution=sol)
        total = trapezoid(g.spectral_function, w_all)
        worst_sum = max(worst_sum, abs(total - 1))
        fails["sum rule D"] += abs(total - 1) > 0.02
        fails["Im D <= 0"] += bool(np.any(response.response_grid(w_pos, p, solution=sol).D.imag > 0))
        # ED side: small chains
        n, nm = int(rng.integers(2, 5)), 12
        cfg = ed.EDConfig(p, n, n_max=nm)
        Hs = ed.build_hamiltonian(cfg, None)
        u, v = rng.normal(size=(2, Hs.shape[0]))
        fails["Hermiticity"] += abs(u @ (Hs @ v) - (Hs @ u) @ v) > 1e-12 * max(1.0, abs(u @ (Hs @ v)))
        H = Hs.toarray()
        xs, zs = np.eye(1), np.eye(1)
        for _ in range(n):
            xs, zs = np.kron(xs, sx), np.kron(zs, sz)
        # the spin flip is a symmetry at any field, photon parity only at omega_x = 0
        flip = np.kron(np.eye(nm + 1), xs)
        bad = np.abs(H @ flip - flip @ H).max() > 1e-12
        H0 = ed.build_hamiltonian(ed.EDConfig(p.replace(omega_x=0.0), n, n_max=nm), None).toarray()
        photon_parity = np.kron(np.diag((-1.0) ** np.arange(nm + 1)), zs)
        bad |= np.abs(H0 @ photon_parity - photon_parity @ H0).max() > 1e-12
        fails["parity commutation"] += bad
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", KrylovBreakdown)
            s = ed.photon_green_function(cfg, w_all, eta=max(p.eta, 5e-3))
        fails["sum rule ED"] += abs(trapezoid(s.spectrum, w_all) - 1) > 0.01
        fails["Im D <= 0"] += bool(np.any(s.D.imag[w_all >= 0] > 0))
    dt = time.perf_counter() - t0
    report(10, "property suites on 100 random draws", not any(fails.values()),
           "failures " + ", ".join(f"{k}={v}" for k, v in fails.items()) + f"; worst |sum-1| (D)={worst_sum:.1e}",
           dt, 120)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
