"""Thermodynamic-limit linear response of the cavity and the spin chain.

The bare matter response ``chi0`` of the mean-field Ising chain is dressed
by the photon-mediated interaction ``V_ind`` in an RPA-like form that is
exact at large N, and the photon propagator follows from it.  Poles of the
propagator outside the two-excitation band ``[2 eps_0, 2 eps_pi]`` are
bound polaritons; they are the roots of the real pole function ``F``.

All frequencies may be scalars or arrays; ``+i0`` is realised as
``+i params.eta``.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import equilibrium
from .errors import (
    GaplessDispersion,
    NegativeDiscriminantForLowerBranch,
    OmegaInsideBand,
    PoleOnGrid,
)
from .model import (
    EffectiveField,
    ModelParams,
    band_edges,
    dispersion,
    half_k_grid,
    is_gapless,
)

# Max number of (omega, k) pairs held in memory at once.
_BLOCK = 2_000_000
EDGE_STANDOFF = 1e-6
ABOVE_BAND_SPAN = 10.0


def _z(omega, params: ModelParams):
    return np.asarray(omega, dtype=float) + 1j * params.eta


def _blocked_average(z, kernel, n_k):
    """``<kernel(z, k)>_BZ`` for every entry of ``z``, in memory-bounded blocks."""
    k, w = half_k_grid(n_k)
    flat = np.ravel(z)
    out = np.empty(flat.shape, dtype=np.result_type(flat, float))
    step = max(1, _BLOCK // k.size)
    for s in range(0, flat.size, step):
        out[s:s + step] = kernel(flat[s:s + step, None], k) @ w
    return out.reshape(np.shape(z))


def _scalar_or_array(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


def chi0_integral(omega, eff: EffectiveField, params: ModelParams, n_k: int | None = None):
    """Bare response of the effective Ising chain, as a momentum integral.

    chi0(w) = -32 J^2 <sin^2 k / (eps_k ((w + i eta)^2 - 4 eps_k^2))>_BZ
    """
    if is_gapless(eff, params):
        raise GaplessDispersion(f"chi0 undefined at omega_x_tilde={eff.omega_x_tilde!r}")
    J = params.J

    def kernel(z, k):
        eps = dispersion(k, eff, params)
        return np.sin(k) ** 2 / (eps * (z * z - 4.0 * eps * eps))

    val = -32.0 * J * J * _blocked_average(_z(omega, params), kernel, n_k or params.n_k)
    return _scalar_or_array(val)


def chi0_finite_sum(omega, eff: EffectiveField, params: ModelParams, n_spins: int):
    """Bare response of a periodic chain of ``n_spins`` spins, as a Lehmann sum.

    The coupling operator only creates pairs (k, -k).  The ground state of
    the even-length periodic chain lives on the antiperiodic momenta
    ``k = 2 pi (m + 1/2) / n``; each pair with 0 < k < pi has excitation
    energy ``2 eps_k`` and matrix element of modulus ``2 |eta_k|``.
    """
    if n_spins < 2 or n_spins % 2:
        raise ValueError(f"n_spins must be even and >= 2, got {n_spins}")
    if is_gapless(eff, params):
        raise GaplessDispersion(f"chi0 undefined at omega_x_tilde={eff.omega_x_tilde!r}")
    k = 2.0 * np.pi * (np.arange(n_spins // 2) + 0.5) / n_spins
    eps = dispersion(k, eff, params)
    eta_k = 2.0 * params.J * np.sin(k) / eps
    weight = 4.0 * eta_k**2
    energy = 2.0 * eps
    z = _z(omega, params)
    terms = weight * 2.0 * energy / (np.asarray(z)[..., None] ** 2 - energy**2)
    return _scalar_or_array(-terms.sum(axis=-1) / n_spins)


def induced_interaction(omega, params: ModelParams):
    """Photon-mediated spin-spin interaction ``2 lam^2 Omega / ((w + i eta)^2 - Omega^2)``."""
    z = _z(omega, params)
    W = params.Omega
    return _scalar_or_array(2.0 * params.lam**2 / W * W * W / (z * z - W * W))


def bare_photon_propagator(omega, params: ModelParams):
    return _scalar_or_array(1.0 / (_z(omega, params) - params.Omega))


def _dress(chi0, v):
    denom = 1.0 + v * chi0
    if np.any(np.abs(denom) < 1e-12):
        warnings.warn("|1 + V_ind chi0| < 1e-12 on the frequency grid", PoleOnGrid, stacklevel=3)
    return chi0 / denom


def dressed_chi(omega, eff: EffectiveField, params: ModelParams):
    """Matter response including the cavity-mediated interaction."""
    chi0 = chi0_integral(omega, eff, params)
    return _scalar_or_array(_dress(np.asarray(chi0), np.asarray(induced_interaction(omega, params))))


def _propagator_from_chi(omega, chi, params):
    d0 = 1.0 / (_z(omega, params) - params.Omega)
    return d0 - params.lam**2 * d0 * chi * d0


def photon_propagator(omega, eff: EffectiveField, params: ModelParams):
    """Retarded photon propagator ``D = D0 - lam^2 D0 chi D0``."""
    chi = np.asarray(dressed_chi(omega, eff, params))
    return _scalar_or_array(_propagator_from_chi(omega, chi, params))


@dataclass
class SpectralGrid:
    omegas: np.ndarray
    chi0: np.ndarray
    chi: np.ndarray
    D: np.ndarray
    params: ModelParams
    field: EffectiveField
    solution: equilibrium.MeanFieldSolution | None = None

    @property
    def spectral_function(self) -> np.ndarray:
        """Photon spectral function ``-Im D / pi``."""
        return -self.D.imag / np.pi


def response_grid(omegas, params: ModelParams, eff: EffectiveField | None = None,
                  solution: equilibrium.MeanFieldSolution | None = None) -> SpectralGrid:
    """Evaluate chi0, chi and D on a frequency grid (one chi0 evaluation)."""
    omegas = np.asarray(omegas, dtype=float)
    if eff is None:
        eff = solution.field if solution is not None else EffectiveField.bare(params)
    chi0 = np.asarray(chi0_integral(omegas, eff, params))
    chi = _dress(chi0, np.asarray(induced_interaction(omegas, params)))
    D = _propagator_from_chi(omegas, chi, params)
    return SpectralGrid(omegas, chi0, chi, D, params, eff, solution)


@dataclass
class SpectralMap:
    """``intensity[i, j] = -Im D(omega_i) / pi`` for coupling ``lambdas[j]``."""

    lambdas: np.ndarray
    omegas: np.ndarray
    intensity: np.ndarray
    columns: list = field(default_factory=list)

    @property
    def band_edges(self) -> np.ndarray:
        return np.array([[c.edges.lower, c.edges.upper] for c in self.columns])


@dataclass
class _Column:
    grid: SpectralGrid
    edges: object


def _column(lam, omegas, params, use_mean_field):
    p = params.replace(lam=float(lam))
    sol = None
    if use_mean_field:
        sol = equilibrium.minimize(p)
        eff = sol.field
    else:
        eff = EffectiveField.bare(p)
    return _Column(response_grid(omegas, p, eff, sol), band_edges(eff, p))


def spectral_map(lambda_grid, omega_grid, params: ModelParams, use_mean_field: bool = True,
                 workers: int = 1) -> SpectralMap:
    """Cavity spectral function as a function of coupling and frequency.

    With ``use_mean_field`` each column is evaluated around its own
    mean-field solution; otherwise around the bare field ``omega_x``.
    """
    lambdas = np.asarray(lambda_grid, dtype=float)
    omegas = np.asarray(omega_grid, dtype=float)

    def run(lam):
        try:
            return _column(lam, omegas, params, use_mean_field)
        except Exception as exc:
            raise type(exc)(f"column lam={lam}: {exc}") from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(run, lambdas))
    else:
        cols = [run(lam) for lam in lambdas]
    intensity = np.column_stack([c.grid.spectral_function for c in cols]) if cols else np.empty((omegas.size, 0))
    return SpectralMap(lambdas, omegas, intensity, cols)


@dataclass(frozen=True)
class PolaritonFit:
    omega_plus: float
    omega_minus: float


def polariton_fit(params: ModelParams, squared_4j: bool = True) -> PolaritonFit:
    """Two-oscillator estimate of the polariton branches.

    2 W+-^2 = a + Omega^2 +- sqrt((a - Omega^2)^2 + 32 lam^2 J Omega)

    with ``a = (4J)^2`` (default, reduces to Omega and 4J at lam = 0) or the
    literal ``a = 4 J^2`` when ``squared_4j`` is False.
    """
    J, W, lam = params.J, params.Omega, params.lam
    a = (4.0 * J) ** 2 if squared_4j else 4.0 * J * J
    root = np.sqrt((a - W * W) ** 2 + 32.0 * lam * lam * J * W)
    plus2 = 0.5 * (a + W * W + root)
    minus2 = 0.5 * (a + W * W - root)
    if minus2 < 0:
        warnings.warn(f"lower branch 2W-^2 = {2 * minus2:.6g} < 0; set to 0",
                      NegativeDiscriminantForLowerBranch, stacklevel=2)
        minus2 = 0.0
    return PolaritonFit(float(np.sqrt(plus2)), float(np.sqrt(minus2)))


def _pole_parts(eff, params):
    """Return callables for the BZ integrals entering F and F'."""
    J = params.J

    def weights(k):
        eps = dispersion(k, eff, params)
        eta2 = (2.0 * J * np.sin(k) / eps) ** 2
        return eta2, eps

    return weights


def pole_function(omega, eff: EffectiveField, params: ModelParams, n_k: int | None = None):
    """Real function whose zeros outside the band are the bound polaritons.

    F(w) = w^2 - Omega^2 - 4 lam^2 Omega <eta_k^2 4 eps_k / (w^2 - 4 eps_k^2)>_BZ
    """
    if is_gapless(eff, params):
        raise GaplessDispersion(f"F undefined at omega_x_tilde={eff.omega_x_tilde!r}")
    edges = band_edges(eff, params)
    w = np.asarray(omega, dtype=float)
    if np.any(edges.contains(w)):
        raise OmegaInsideBand(f"omega inside the band [{edges.lower}, {edges.upper}]")
    weights = _pole_parts(eff, params)

    def kernel(w2, k):
        eta2, eps = weights(k)
        return eta2 * 4.0 * eps / (w2 - 4.0 * eps * eps)

    integral = _blocked_average(w * w, kernel, n_k or params.n_k)
    W = params.Omega
    return _scalar_or_array(w * w - W * W - 4.0 * params.lam**2 * W * integral)


def pole_function_derivative(omega, eff: EffectiveField, params: ModelParams, n_k: int | None = None):
    """dF/dw; positive for w > 0 outside the band."""
    w = np.asarray(omega, dtype=float)
    weights = _pole_parts(eff, params)

    def kernel(w2, k):
        eta2, eps = weights(k)
        return eta2 * 4.0 * eps / (w2 - 4.0 * eps * eps) ** 2

    integral = _blocked_average(w * w, kernel, n_k or params.n_k)
    return _scalar_or_array(2.0 * w * (1.0 + 4.0 * params.lam**2 * params.Omega * integral))


def existence_threshold(eff: EffectiveField, params: ModelParams, n_k: int | None = None) -> float:
    """``4 lam^2 <eta_k^2 / eps_k>_BZ``; a bound state below a band lying
    above the cavity (Omega < 2 eps_0) exists iff Omega exceeds it."""
    weights = _pole_parts(eff, params)

    def f(k):
        eta2, eps = weights(k)
        return eta2 / eps

    k, w = half_k_grid(n_k or params.n_k)
    return float(4.0 * params.lam**2 * (f(k) @ w))


@dataclass(frozen=True)
class BoundState:
    omega_b: float
    side: str
    residue_proxy: float
    gap_to_edge: float


def _root_in(lo, hi, F, tol):
    f_lo, f_hi = F(lo), F(hi)
    if f_lo == 0.0:
        return lo
    if np.sign(f_lo) == np.sign(f_hi):
        return None
    root = brentq(F, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    # brentq stops on bracket width; tighten by bisection on |F| if needed.
    a, b = lo, hi
    while abs(F(root)) > tol and b - a > 1e-300:
        if np.sign(F(root)) == np.sign(f_lo):
            a = root
        else:
            b = root
        root = 0.5 * (a + b)
        if b - a < 1e-16 * max(1.0, abs(root)):
            break
    return root


def find_bound_states(eff: EffectiveField, params: ModelParams, n_k: int | None = None,
                      standoff: float = EDGE_STANDOFF) -> list[BoundState]:
    """Roots of F on each side of the two-excitation band.

    F increases monotonically on (0, lower) and on (upper, inf), so each side
    holds at most one root; it is bracketed on ``[0, lower - d]`` and
    ``[upper + d, upper + 10 Omega]`` with ``d = standoff * Omega``.
    """
    if is_gapless(eff, params):
        raise GaplessDispersion(f"no band gap at omega_x_tilde={eff.omega_x_tilde!r}")
    W = params.Omega
    edges = band_edges(eff, params)
    d = standoff * W
    tol = 1e-10 * W * W

    def F(w):
        return float(pole_function(w, eff, params, n_k))

    found = []
    brackets = []
    if edges.lower - d > 0:
        brackets.append(("below", 0.0, edges.lower - d))
    brackets.append(("above", edges.upper + d, edges.upper + ABOVE_BAND_SPAN * W))
    for side, lo, hi in brackets:
        root = _root_in(lo, hi, F, tol)
        if root is None:
            continue
        slope = float(pole_function_derivative(root, eff, params, n_k))
        gap = edges.lower - root if side == "below" else root - edges.upper
        found.append(BoundState(float(root), side, 1.0 / abs(slope) if slope else np.inf, float(gap)))
    return found
