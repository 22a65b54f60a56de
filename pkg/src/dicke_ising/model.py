"""Model parameters and the effective transverse-field Ising band.

Energies are in units of the cavity frequency unless the caller rescales;
nothing here enforces that, it is just the convention used by the CLI and
the demos (``Omega = 1``).

The cavity enters the matter side only through the effective transverse
field ``omega_x_tilde = omega_x - 4 lam**2 / Omega * m_x``.  Everything in
this module is a pure function of that field and the couplings.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GaplessDispersion, InvalidParameters

# Relative tolerance (in units of J) below which the band gap counts as closed.
GAP_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Couplings plus the numerical controls shared by every solver.

    ``lam`` is the collective light-matter coupling (``lambda`` is a Python
    keyword).  ``eta`` replaces the retarded ``+i0`` by a finite shift and
    ``n_k`` is the number of points of the periodic momentum grid.
    """

    omega_x: float = 0.0
    J: float = 0.25
    lam: float = 0.0
    Omega: float = 1.0
    eta: float = 1e-3
    n_k: int = 4096

    def __post_init__(self):
        if not self.J > 0:
            raise InvalidParameters(f"J must be positive, got {self.J}")
        if not self.Omega > 0:
            raise InvalidParameters(f"Omega must be positive, got {self.Omega}")
        if not self.lam >= 0:
            raise InvalidParameters(f"lam must be non-negative, got {self.lam}")
        if not self.eta > 0:
            raise InvalidParameters(f"eta must be positive, got {self.eta}")
        if int(self.n_k) != self.n_k or self.n_k < 2 or self.n_k % 2:
            raise InvalidParameters(f"n_k must be an even integer >= 2, got {self.n_k}")

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @property
    def lambda_sq_over_omega(self) -> float:
        return self.lam**2 / self.Omega


@dataclass(frozen=True)
class EffectiveField:
    omega_x_tilde: float
    m_x: float = 0.0

    @classmethod
    def bare(cls, params: ModelParams) -> "EffectiveField":
        """Field seen by the spins when the cavity is empty (m_x = 0)."""
        return cls(float(params.omega_x), 0.0)

    @classmethod
    def from_magnetization(cls, m_x: float, params: ModelParams) -> "EffectiveField":
        w = params.omega_x - 4.0 * params.lam**2 / params.Omega * m_x
        return cls(float(w), float(m_x))


@dataclass(frozen=True)
class BandEdges:
    """Edges of the zero-momentum two-excitation band ``2 eps_k``."""

    lower: float
    upper: float

    def contains(self, omega) -> np.ndarray:
        w = np.abs(np.asarray(omega, dtype=float))
        return (w >= self.lower) & (w <= self.upper)


def k_grid(n_k: int) -> np.ndarray:
    """Periodic grid ``k_m = -pi + 2 pi m / n_k``, m = 0 .. n_k - 1."""
    return -np.pi + 2.0 * np.pi * np.arange(n_k) / n_k


def half_k_grid(n_k: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [0, pi] and weights reproducing the periodic trapezoid rule.

    For an even integrand, ``sum(w * f(k))`` equals the mean of ``f`` over
    ``k_grid(n_k)`` while evaluating it at only ``n_k // 2 + 1`` points.
    """
    half = n_k // 2
    k = np.pi * np.arange(half + 1) / half
    w = np.full(half + 1, 2.0 / n_k)
    w[0] = w[-1] = 1.0 / n_k
    return k, w


def bz_average(func, n_k: int) -> np.ndarray:
    """Brillouin-zone average of an even, 2pi-periodic ``func(k)``.

    ``func`` receives a 1-d array of momenta and may return an array whose
    last axis runs over them; the average is taken along that axis.
    """
    k, w = half_k_grid(n_k)
    return np.asarray(func(k)) @ w


def richardson_check(func, n_k: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Average on ``n_k`` and ``2 n_k`` points; return both and the max abs difference."""
    coarse = bz_average(func, n_k)
    fine = bz_average(func, 2 * n_k)
    return coarse, fine, float(np.max(np.abs(fine - coarse)))


def dispersion(k, eff: EffectiveField, params: ModelParams) -> np.ndarray:
    """Single-fermion energy of the effective Ising chain."""
    J, w = params.J, eff.omega_x_tilde
    k = np.asarray(k, dtype=float)
    val = 4.0 * J * J + w * w - 4.0 * J * w * np.cos(k)
    return np.sqrt(np.maximum(val, 0.0))


def is_gapless(eff: EffectiveField, params: ModelParams) -> bool:
    return abs(2.0 * params.J - abs(eff.omega_x_tilde)) <= GAP_TOL * params.J


def _require_gap(eff: EffectiveField, params: ModelParams):
    if is_gapless(eff, params):
        raise GaplessDispersion(
            f"dispersion is gapless at omega_x_tilde={eff.omega_x_tilde!r}, J={params.J!r}"
        )


def bogoliubov_coupling(k, eff: EffectiveField, params: ModelParams) -> np.ndarray:
    """``eta_k = 2 u_k v_k = 2J sin k / eps_k``, odd in k with |eta_k| <= 1."""
    k = np.asarray(k, dtype=float)
    eps = dispersion(k, eff, params)
    if np.any(eps == 0.0) or is_gapless(eff, params):
        raise GaplessDispersion(
            f"eps_k vanishes on the requested momenta (omega_x_tilde={eff.omega_x_tilde!r})"
        )
    return 2.0 * params.J * np.sin(k) / eps


def coupling_profile_real_space(eff: EffectiveField, params: ModelParams, n_sites: int):
    """Real-space profile of the cavity coupling to domain-wall pairs.

    The Fourier transform ``(1/N) sum_k eta_k exp(i k j)`` of the odd, real
    ``eta_k`` is purely imaginary.  We return its imaginary part,
    ``s_j = (1/N) sum_k eta_k sin(k j)``, for ``j = -n/2 .. n/2`` on the
    grid ``k_m = 2 pi m / n``.

    Returns ``(j, s)``.
    """
    if n_sites < 2 or n_sites % 2:
        raise InvalidParameters(f"n_sites must be even and >= 2, got {n_sites}")
    k = 2.0 * np.pi * np.arange(n_sites) / n_sites
    eta_k = bogoliubov_coupling(k, eff, params)
    profile = np.fft.ifft(eta_k).imag
    j = np.arange(-n_sites // 2, n_sites // 2 + 1)
    return j, profile[j % n_sites]


def band_edges(eff: EffectiveField, params: ModelParams) -> BandEdges:
    J, w = params.J, eff.omega_x_tilde
    return BandEdges(lower=2.0 * abs(2.0 * J - abs(w)), upper=2.0 * (2.0 * J + abs(w)))
