"""Built-in oracle suite run by ``dicke-ising validate``.

Each check compares a production code path against an independent
construction: a closed form, a brute-force dense matrix, or a file read back
from disk.  The dense Hamiltonian here is assembled from 2x2 Pauli matrices
with ``np.kron`` and never touches the sparse builder.
"""
from __future__ import annotations

import tempfile
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ed, equilibrium, response, serialization
from .model import EffectiveField, ModelParams, band_edges

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass
class Check:
    name: str
    passed: bool
    error: float
    tolerance: float
    seconds: float = 0.0


def dense_hamiltonian(params: ModelParams, n_spins: int, n_max: int, boundary: str = "open"):
    """Full Hamiltonian from Pauli Kronecker products (photon factor first)."""
    def site(op, j):
        out = np.eye(1)
        for i in range(n_spins):
            out = np.kron(out, op if i == j else np.eye(2))
        return out

    dim_s = 2**n_spins
    sx = sum(site(_SX, j) for j in range(n_spins))
    bonds = [(j, j + 1) for j in range(n_spins - 1)]
    if boundary == "periodic" and n_spins > 1:
        bonds.append((n_spins - 1, 0))
    zz = sum((site(_SZ, i) @ site(_SZ, j) for i, j in bonds), np.zeros((dim_s, dim_s)))
    a = np.diag(np.sqrt(np.arange(1.0, n_max + 1)), 1)
    ip = np.eye(n_max + 1)
    H = (np.kron(ip, 0.5 * params.omega_x * sx - params.J * zz)
         + params.Omega * np.kron(a.T @ a, np.eye(dim_s))
         - params.lam / np.sqrt(n_spins) * np.kron(a + a.T, sx))
    return H, np.kron(a, np.eye(dim_s))


def lehmann_propagator(H, a_full, omegas, eta):
    """Retarded photon propagator from a full eigen-decomposition."""
    E, V = np.linalg.eigh(H)
    g = V[:, 0]
    up = V.T @ (a_full.T @ g)
    down = V.T @ (a_full @ g)
    z = np.asarray(omegas)[:, None] + 1j * eta
    dE = (E - E[0])[None, :]
    return (np.abs(up) ** 2 / (z - dE)).sum(axis=1) - (np.abs(down) ** 2 / (z + dE)).sum(axis=1)


def _rel(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def check_flat_band_chi0(n_omega: int = 2000) -> float:
    p = ModelParams(J=0.25, lam=0.2, eta=1e-3)
    w = np.linspace(0.0, 3.0, n_omega)
    got = response.chi0_integral(w, EffectiveField(0.0), p)
    z = w + 1j * p.eta
    return _rel(got, -8.0 * p.J / (z * z - 16.0 * p.J**2))


def check_flat_band_poles() -> float:
    p = ModelParams(J=0.25, lam=0.2, eta=1e-3)
    # (w^2 - W^2)(w^2 - 16J^2) = 16 lam^2 W J, quadratic in w^2
    b = p.Omega**2 + 16 * p.J**2
    c = p.Omega**2 * 16 * p.J**2 - 16 * p.lam**2 * p.Omega * p.J
    exact = np.sqrt(np.sort(np.roots([1.0, -b, c]).real))
    w = np.linspace(0.5, 1.5, 20001)
    A = -np.imag(response.photon_propagator(w, EffectiveField(0.0), p))
    idx = np.flatnonzero((A[1:-1] > A[:-2]) & (A[1:-1] > A[2:])) + 1
    peaks = np.sort(w[idx[np.argsort(A[idx])[-2:]]])
    return float(np.max(np.abs(peaks - exact)) / p.eta)


def check_finite_sum(n_spins: int = 4096) -> float:
    p = ModelParams(omega_x=0.5, J=0.25, lam=0.2, eta=1e-3)
    sol = equilibrium.minimize(p)
    e = band_edges(sol.field, p)
    w = np.concatenate([np.linspace(0.0, 0.95 * e.lower, 250),
                        np.linspace(1.05 * e.upper, 2.0 * e.upper, 250)])
    return _rel(response.chi0_finite_sum(w, sol.field, p, n_spins),
                response.chi0_integral(w, sol.field, p))


def check_dense_ed() -> tuple[float, float]:
    p = ModelParams(omega_x=0.3, J=0.25, lam=0.2, eta=0.05)
    cfg = ed.EDConfig(p, 3, n_max=4, n_eigen=6)
    H, a_full = dense_hamiltonian(p, 3, 4)
    exact = np.linalg.eigvalsh(H)
    res = ed.ground_state(cfg)
    sparse = np.sort(np.concatenate([np.linalg.eigvalsh(ed.build_hamiltonian(cfg, s).toarray())
                                     for s in cfg.sectors()]))
    e_err = max(float(np.max(np.abs(sparse - exact))), abs(res.ground_energy - exact[0]))
    w = np.linspace(-2.0, 3.0, 501)
    with warnings.catch_warnings():
        # a 20-dimensional sector exhausts the Krylov space long before depth 200
        warnings.simplefilter("ignore", ed.KrylovBreakdown)
        got = ed.photon_green_function(cfg, w, result=res).D
    ref = lehmann_propagator(H, a_full, w, p.eta)
    return e_err, float(np.max(np.abs(got - ref)))


def check_self_read() -> float:
    """Write small results in both formats and compare what comes back."""
    p = ModelParams(omega_x=0.2, J=0.25, lam=0.3, eta=1e-2, n_k=256)
    grid = response.response_grid(np.linspace(0.1, 2.0, 37), p, equilibrium.minimize(p).field)
    worst = 0.0
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "grid.csv"
        serialization.write_result(grid, out, "csv")
        back = serialization.read_table(out)
        worst = max(worst, float(np.max(np.abs(back["D_im"] - grid.D.imag))),
                    float(np.max(np.abs(back["omega"] - grid.omegas))))
        out = Path(tmp) / "grid.json"
        serialization.write_result(grid, out, "json")
        data = serialization.read_json(out)["data"]
        worst = max(worst, float(np.max(np.abs(np.array(data["D"]["re"]) - grid.D.real))))
    return worst


def run_suite() -> list[Check]:
    specs = [
        ("flat-band chi0 closed form (rel)", check_flat_band_chi0, 1e-8),
        ("flat-band polariton peaks (units of eta)", check_flat_band_poles, 1.0),
        ("finite pair sum N=4096 vs integral (rel)", check_finite_sum, 1e-6),
        ("ED eigenvalues vs dense Pauli build", lambda: dense(0), 1e-12),
        ("ED Green function vs dense Lehmann sum", lambda: dense(1), 1e-8),
        ("CSV/JSON self-read (bitwise)", check_self_read, 0.0),
    ]
    ed_errors = []

    def dense(i):
        if not ed_errors:
            ed_errors.extend(check_dense_ed())
        return ed_errors[i]

    out = []
    for name, fn, tol in specs:
        t0 = time.perf_counter()
        err = float(fn())
        out.append(Check(name, bool(err <= tol), err, tol, time.perf_counter() - t0))
    return out


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  {'error':>10}  {'tolerance':>9}"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  "
                     f"{c.error:>10.3e}  {c.tolerance:>9.1e}")
    return "\n".join(lines)
