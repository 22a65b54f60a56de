"""Finite-size exact diagonalisation of the full Dicke-Ising Hamiltonian.

    H = omega_x/2 sum_j sx_j - J sum_<ij> sz_i sz_j
        - lam/sqrt(N) sum_j sx_j (a + a^dag) + Omega a^dag a

Basis states are ``|n> (x) |s>`` with the photon number ``n`` as the major
index and the spin configuration ``s`` as the minor one; bit ``j`` of ``s``
set means ``sz_j = -1``.

The global spin flip ``P = prod_j sx_j`` commutes with H for every coupling,
so the solver works in its two eigen-sectors separately.  This removes the
(quasi-)degeneracy of the two z-ordered ground states and halves every
vector.  A symmetric basis state is ``(|s> + p |~s>)/sqrt(2)`` with
``s < 2^(N-1)`` and ``~s`` the bitwise complement.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import DimensionBudgetExceeded, EigenNonConverged, KrylovBreakdown
from .model import ModelParams

DENSE_LIMIT = 600
# Full reorthogonalisation is used while depth * dim stays below this.
REORTH_LIMIT = 60_000_000


@dataclass(frozen=True)
class EDConfig:
    params: ModelParams
    n_spins: int
    n_max: int = 40
    boundary: str = "open"
    n_eigen: int = 2
    green_fn_depth: int = 200
    max_dimension: int = 2_000_000
    use_parity: bool = True

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("n_spins must be >= 1")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if self.dimension > self.max_dimension:
            raise DimensionBudgetExceeded(
                f"Hilbert dimension {self.dimension} exceeds budget {self.max_dimension}"
            )

    @property
    def dimension(self) -> int:
        return (2 ** self.n_spins) * (self.n_max + 1)

    def sectors(self):
        return (+1, -1) if self.use_parity and self.n_spins > 1 else (None,)


def _bonds(n, boundary):
    bonds = [(j, j + 1) for j in range(n - 1)]
    if boundary == "periodic" and n > 1:
        bonds.append((n - 1, 0))
    return bonds


def spin_operators(n: int, boundary: str = "open"):
    """Sparse ``sum_j sx_j``, ``sum_<ij> sz_i sz_j`` and the bit table on 2^n states."""
    dim = 2**n
    s = np.arange(dim)
    bits = (s[:, None] >> np.arange(n)) & 1
    sz = 1 - 2 * bits
    zz = np.zeros(dim)
    for i, j in _bonds(n, boundary):
        zz += sz[:, i] * sz[:, j]
    rows = np.repeat(s, n)
    cols = (s[:, None] ^ (1 << np.arange(n))).ravel()
    sx = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(dim, dim))
    return sx, sp.diags(zz).tocsr(), sz


def _project(op: sp.spmatrix, parity) -> sp.csr_matrix:
    """Restrict a flip-symmetric spin operator to the sector of given parity."""
    if parity is None:
        return sp.csr_matrix(op)
    op = sp.csr_matrix(op)
    half = op.shape[0] // 2
    if half == 0:
        return op
    upper = op[:half, :half]
    flipped = op[:half, half:][:, ::-1]
    return sp.csr_matrix(upper + parity * flipped)


def photon_operators(n_max: int):
    n = np.arange(n_max + 1, dtype=float)
    a = sp.diags(np.sqrt(n[1:]), 1, shape=(n_max + 1, n_max + 1), format="csr")
    return a, sp.diags(n).tocsr()


def _spin_sector_dim(cfg, parity):
    return 2**cfg.n_spins if parity is None else max(1, 2 ** (cfg.n_spins - 1))


def build_hamiltonian(cfg: EDConfig, parity=None) -> sp.csr_matrix:
    """Sparse Hamiltonian, optionally restricted to a spin-flip sector (+1 / -1)."""
    p = cfg.params
    N = cfg.n_spins
    if cfg.n_spins == 1 and parity is not None:
        raise ValueError("parity sectors need n_spins >= 2")
    sx, zz, _ = spin_operators(N, cfg.boundary)
    sx, zz = _project(sx, parity), _project(zz, parity)
    h_spin = 0.5 * p.omega_x * sx - p.J * zz
    a, num = photon_operators(cfg.n_max)
    i_ph = sp.identity(cfg.n_max + 1, format="csr")
    i_s = sp.identity(sx.shape[0], format="csr")
    H = (sp.kron(i_ph, h_spin)
         + p.Omega * sp.kron(num, i_s)
         - p.lam / np.sqrt(N) * sp.kron(a + a.T, sx))
    return sp.csr_matrix(H)


def _lowest(H, k, v0=None):
    dim = H.shape[0]
    k = min(k, dim)
    if dim <= DENSE_LIMIT or k >= dim - 1:
        vals, vecs = np.linalg.eigh(H.toarray())
        return vals[:k], vecs[:, :k]
    try:
        vals, vecs = eigsh(H, k=k, which="SA", tol=0, v0=v0)
    except ArpackNoConvergence as exc:
        raise EigenNonConverged(f"ARPACK did not converge: {exc}") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


@dataclass
class SectorState:
    parity: int | None
    energies: np.ndarray
    vectors: np.ndarray
    hamiltonian: sp.csr_matrix
    residuals: np.ndarray


@dataclass
class EDResult:
    """Low-lying spectrum and ground-state observables.

    ``observables`` holds ``m_x`` (<sum sx>/N), ``m_z_proxy``
    (sqrt of <sz_0 sz_{N//2}>, clipped at 0) and ``n_ph`` (<a^dag a>/N)
    for the overall ground state; ``sector_observables`` has the same per
    spin-flip sector.  ``degenerate`` flags a ground doublet split by less
    than 1e-8 (relative), whether it straddles the two spin-flip sectors
    (z-ordered chain) or sits inside one (superradiant pair at omega_x = 0).
    """

    config: EDConfig
    energies: np.ndarray
    ground_energy: float
    ground_parity: int | None
    observables: dict
    sector_observables: dict
    residuals: np.ndarray
    tail_weight: float
    degenerate: bool
    sectors: dict = field(repr=False, default_factory=dict)
    photon_spectrum: "PhotonSpectrum | None" = None

    @property
    def ground_state(self) -> np.ndarray:
        return self.sectors[self.ground_parity].vectors[:, 0]

    @property
    def cutoff_adequate(self) -> bool:
        return self.tail_weight < 1e-8


def _observables(cfg, parity, vec):
    N = cfg.n_spins
    sx, _, sz = spin_operators(N, cfg.boundary)
    dim_s = _spin_sector_dim(cfg, parity)
    psi = vec.reshape(cfg.n_max + 1, dim_s)
    sx_p = _project(sx, parity)
    m_x = float(np.sum(psi * (psi @ sx_p.T)) / N)
    corr = (sz[:, 0] * sz[:, N // 2])[:dim_s]
    zz = float(np.sum(np.abs(psi) ** 2 * corr[None, :]))
    prob_n = np.sum(np.abs(psi) ** 2, axis=1)
    n_ph = float(prob_n @ np.arange(cfg.n_max + 1) / N)
    return {"m_x": m_x, "m_z_proxy": float(np.sqrt(max(zz, 0.0))), "zz": zz, "n_ph": n_ph,
            "tail_weight": float(prob_n[-1])}


def ground_state(cfg: EDConfig, residual_tol: float = 1e-8) -> EDResult:
    """Lowest ``n_eigen`` states in every spin-flip sector."""
    sectors = {}
    for parity in cfg.sectors():
        H = build_hamiltonian(cfg, parity)
        vals, vecs = _lowest(H, cfg.n_eigen)
        res = np.linalg.norm(H @ vecs - vecs * vals, axis=0)
        scale = max(1.0, float(np.max(np.abs(vals))))
        if np.any(res > residual_tol * scale):
            raise EigenNonConverged(f"residuals {res} above tolerance", residuals=res)
        sectors[parity] = SectorState(parity, vals, vecs, H, res)
    ground_parity = min(sectors, key=lambda q: sectors[q].energies[0])
    energies = np.sort(np.concatenate([s.energies for s in sectors.values()]))[: cfg.n_eigen]
    per_sector = {q: _observables(cfg, q, s.vectors[:, 0]) for q, s in sectors.items()}
    e0 = float(sectors[ground_parity].energies[0])
    tol = 1e-8 * max(1.0, abs(e0))
    across = False
    if len(sectors) == 2:
        e_other = min(s.energies[0] for q, s in sectors.items() if q != ground_parity)
        across = abs(e_other - e0) < tol
    # A doublet inside one spin-flip sector is the superradiant pair at omega_x = 0,
    # split by photon parity (-1)^n prod sz rather than by the spin flip.
    degenerate = across or (energies.size > 1 and energies[1] - energies[0] < tol)
    obs = dict(per_sector[ground_parity])
    if across:
        # An equal-weight mixture of the two sectors (the symmetric combination).
        for key in ("m_x", "zz", "n_ph"):
            obs[key] = 0.5 * sum(o[key] for o in per_sector.values())
        obs["m_z_proxy"] = float(np.sqrt(max(obs["zz"], 0.0)))
    return EDResult(
        config=cfg, energies=energies, ground_energy=e0, ground_parity=ground_parity,
        observables=obs, sector_observables=per_sector,
        residuals=np.concatenate([s.residuals for s in sectors.values()]),
        tail_weight=max(o["tail_weight"] for o in per_sector.values()),
        degenerate=degenerate, sectors=sectors,
    )


def lanczos(H, v0, depth: int, reorthogonalize: bool | None = None, tol: float = 1e-12):
    """Hermitian Lanczos tridiagonalisation started from ``v0``.

    Returns ``(alpha, beta, norm, breakdown)`` where ``beta[i]`` couples
    steps ``i`` and ``i + 1`` and ``norm = |v0|``.
    """
    dim = H.shape[0]
    depth = min(depth, dim)
    norm = float(np.linalg.norm(v0))
    if norm == 0.0:
        return np.zeros(0), np.zeros(0), 0.0, True
    if reorthogonalize is None:
        reorthogonalize = depth * dim <= REORTH_LIMIT
    basis = np.empty((depth, dim), dtype=v0.dtype) if reorthogonalize else None
    alpha, beta = [], []
    v_prev = np.zeros_like(v0)
    v = v0 / norm
    b_prev = 0.0
    breakdown = False
    for i in range(depth):
        if reorthogonalize:
            basis[i] = v
        w = H @ v
        a = float(np.real(np.vdot(v, w)))
        w = w - a * v - b_prev * v_prev
        if reorthogonalize:
            w -= basis[: i + 1].T @ (basis[: i + 1].conj() @ w)
        alpha.append(a)
        b = float(np.linalg.norm(w))
        if i == depth - 1:
            break
        if b < tol * max(1.0, abs(a)):
            breakdown = True
            break
        beta.append(b)
        v_prev, v, b_prev = v, w / b, b
    return np.array(alpha), np.array(beta), norm, breakdown


def continued_fraction(z, alpha, beta):
    """``<v0|(z - T)^-1|v0>`` for the tridiagonal T, evaluated bottom-up."""
    z = np.asarray(z, dtype=complex)
    g = np.zeros_like(z)
    for i in range(len(alpha) - 1, -1, -1):
        tail = beta[i] ** 2 * g if i < len(beta) else 0.0
        g = 1.0 / (z - alpha[i] - tail)
    return g


@dataclass
class PhotonSpectrum:
    """Finite-N photon propagator and its pole decomposition.

    ``poles``/``weights`` hold the Ritz excitation energies; hole poles sit
    at negative frequency with negative weight, so ``weights.sum()`` is
    <[a, a^dag]> = 1 up to truncation.
    """

    omegas: np.ndarray
    D: np.ndarray
    poles: np.ndarray
    weights: np.ndarray
    eta: float
    breakdown: bool
    particle: tuple = field(repr=False, default=())
    hole: tuple = field(repr=False, default=())

    @property
    def spectrum(self) -> np.ndarray:
        return -self.D.imag / np.pi

    def weight_in(self, lo: float, hi: float) -> float:
        mask = (self.poles >= lo) & (self.poles <= hi)
        return float(self.weights[mask].sum())


def _apply_a(vec, cfg, parity, dagger):
    dim_s = _spin_sector_dim(cfg, parity)
    psi = vec.reshape(cfg.n_max + 1, dim_s)
    a, _ = photon_operators(cfg.n_max)
    op = a.T if dagger else a
    return (op @ psi).ravel()


def photon_green_function(cfg: EDConfig, omega_grid, eta: float | None = None,
                          result: EDResult | None = None,
                          reorthogonalize: bool | None = None) -> PhotonSpectrum:
    """Retarded ``D_N(w)`` from particle (a^dag|0>) and hole (a|0>) Lanczos chains."""
    if result is None:
        result = ground_state(cfg)
    eta = cfg.params.eta if eta is None else eta
    parity = result.ground_parity
    sector = result.sectors[parity]
    H, psi0, e0 = sector.hamiltonian, sector.vectors[:, 0], sector.energies[0]
    depth = cfg.green_fn_depth
    omegas = np.asarray(omega_grid, dtype=float)
    z = omegas + 1j * eta

    pa, pb, pn, p_break = lanczos(H, _apply_a(psi0, cfg, parity, True), depth, reorthogonalize)
    ha, hb, hn, h_break = lanczos(H, _apply_a(psi0, cfg, parity, False), depth, reorthogonalize)
    D = np.zeros(omegas.shape, dtype=complex)
    poles, weights = [], []
    if pn > 0:
        D += pn**2 * continued_fraction(z + e0, pa, pb)
        th, U = eigh_tridiagonal(pa, pb) if len(pa) > 1 else (pa, np.ones((1, 1)))
        poles.append(th - e0)
        weights.append(pn**2 * U[0] ** 2)
    if hn > 0:
        D += hn**2 * continued_fraction(-z + e0, ha, hb)
        th, U = eigh_tridiagonal(ha, hb) if len(ha) > 1 else (ha, np.ones((1, 1)))
        poles.append(-(th - e0))
        weights.append(-(hn**2) * U[0] ** 2)
    breakdown = p_break or h_break
    if breakdown:
        warnings.warn("Lanczos chain terminated on an invariant subspace", KrylovBreakdown, stacklevel=2)
    poles = np.concatenate(poles) if poles else np.zeros(0)
    weights = np.concatenate(weights) if weights else np.zeros(0)
    order = np.argsort(poles)
    return PhotonSpectrum(omegas, D, poles[order], weights[order], eta, breakdown,
                          (pa, pb, pn), (ha, hb, hn))


def photon_spectrum(cfg: EDConfig, omega_grid, eta: float | None = None) -> EDResult:
    """Ground state plus photon spectral function in one call."""
    res = ground_state(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KrylovBreakdown)
        res.photon_spectrum = photon_green_function(cfg, omega_grid, eta, res)
    return res


@dataclass
class FiniteSizeScan:
    """Per-size spectral maps (rows omega, columns lambda) and tracked-pole weights."""

    sizes: list
    lambdas: np.ndarray
    omegas: np.ndarray
    maps: dict
    pole_weight: np.ndarray
    window: tuple
    results: dict = field(repr=False, default_factory=dict)


def finite_size_scan(cfg_base: EDConfig, sizes, lambda_grid, omega_grid,
                     target_omega: float, half_width: float, eta: float | None = None,
                     workers: int = 1) -> FiniteSizeScan:
    """Photon spectra for several chain lengths and couplings.

    The tracked intensity is the total pole weight inside
    ``[target_omega - half_width, target_omega + half_width]``.
    """
    lambdas = np.asarray(lambda_grid, dtype=float)
    omegas = np.asarray(omega_grid, dtype=float)
    cells = [(n, lam) for n in sizes for lam in lambdas]
    lo, hi = target_omega - half_width, target_omega + half_width

    def run(cell):
        n, lam = cell
        cfg = EDConfig(cfg_base.params.replace(lam=float(lam)), n, cfg_base.n_max,
                       cfg_base.boundary, cfg_base.n_eigen, cfg_base.green_fn_depth,
                       cfg_base.max_dimension, cfg_base.use_parity)
        try:
            return photon_spectrum(cfg, omegas, eta)
        except Exception as exc:
            raise type(exc)(f"N={n}, lam={lam}: {exc}") from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(run, cells))
    else:
        out = [run(c) for c in cells]
    results = dict(zip(cells, out))
    maps = {n: np.column_stack([results[(n, lam)].photon_spectrum.spectrum for lam in lambdas])
            for n in sizes}
    weight = np.array([[results[(n, lam)].photon_spectrum.weight_in(lo, hi) for lam in lambdas]
                       for n in sizes])
    return FiniteSizeScan(list(sizes), lambdas, omegas, maps, weight, (lo, hi), results)
