"""Mean-field ground state and phase diagram.

In the thermodynamic limit the cavity is a classical field and the spins
see a transverse-field Ising chain with field ``omega_x_tilde``.  The
energy per spin

    e0(m) = lam^2/Omega m^2 - 1/2 <eps_k(omega_x - 4 lam^2/Omega m)>_BZ

is minimised over the transverse magnetisation ``m``.  Its gradient is

    de0/dm = 2 lam^2/Omega (m - M(omega_x_tilde)),

with ``M(h) = -<d eps_k / dh>`` the transverse magnetisation of the chain
in field ``h``.  The landscape can have two local minima near the first
order line, so we scan it on a fixed grid and refine each local minimum
separately.

Sign convention: the Zeeman term is ``+omega_x/2 sum sigma^x``, so for
``omega_x > 0`` the spins anti-align and ``m_x < 0``.  At ``omega_x = 0`` in
the superradiant phase the two symmetric minima are degenerate and the
non-negative branch is returned.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import MultipleCrossings, NoCrossing, NonConverged
from .model import EffectiveField, ModelParams, half_k_grid

N_SCAN = 201
JUMP_THRESHOLD = 0.05
# Energies closer than this (relative to J) count as degenerate minima.
DEGENERACY_TOL = 1e-11
# Boundary points are bisected to this fraction of the grid spacing.
BOUNDARY_XTOL = 1e-6


@dataclass(frozen=True)
class MeanFieldSolution:
    m_x: float
    omega_x_tilde: float
    e0: float
    m_z: float
    n_ph: float
    degenerate_minima: bool = False

    @property
    def field(self) -> EffectiveField:
        return EffectiveField(self.omega_x_tilde, self.m_x)


def _band_quantities(h, params: ModelParams):
    """BZ averages of eps_k and of -d eps_k/dh for an array of fields ``h``."""
    k, w = half_k_grid(params.n_k)
    J = params.J
    h = np.asarray(h, dtype=float)[..., None]
    c = np.cos(k)
    eps = np.sqrt(np.maximum(4 * J * J + h * h - 4 * J * h * c, 0.0))
    # d eps / dh = (h - 2J cos k) / eps; the 0/0 at a closed gap is replaced by its limit.
    with np.errstate(invalid="ignore", divide="ignore"):
        deps = np.where(eps > 0, (h - 2 * J * c) / eps, np.sign(h))
    return eps @ w, -(deps @ w)


def transverse_magnetization(omega_x_tilde, params: ModelParams):
    """<sigma^x> per spin of the Ising chain in transverse field ``omega_x_tilde``."""
    return _band_quantities(omega_x_tilde, params)[1]


def energy_density(m_x, params: ModelParams):
    """Variational energy per spin ``e0(m_x)``; accepts scalars or arrays."""
    m = np.asarray(m_x, dtype=float)
    g = params.lam**2 / params.Omega
    avg_eps, _ = _band_quantities(params.omega_x - 4 * g * m, params)
    out = g * m * m - 0.5 * avg_eps
    return float(out) if out.ndim == 0 else out


def _m_z(omega_x_tilde, J):
    r = abs(omega_x_tilde) / (2 * J)
    return (1.0 - r * r) ** 0.125 if r <= 1.0 else 0.0


def _stationary_residual(m, params):
    g = params.lam**2 / params.Omega
    return m - transverse_magnetization(params.omega_x - 4 * g * m, params)


def _local_minima(params: ModelParams, n_scan: int) -> list[tuple[float, float]]:
    ms = np.linspace(-1.0, 1.0, n_scan)
    g = params.lam**2 / params.Omega
    r = ms - transverse_magnetization(params.omega_x - 4 * g * ms, params)
    found = []
    for i in range(n_scan - 1):
        # de0/dm has the sign of r: a minimum sits where r goes from - to +.
        if r[i] <= 0.0 < r[i + 1]:
            if r[i] == 0.0:
                m = float(ms[i])
            else:
                try:
                    m, info = brentq(
                        _stationary_residual, ms[i], ms[i + 1], args=(params,),
                        xtol=1e-14, rtol=4 * np.finfo(float).eps, full_output=True,
                    )
                except (RuntimeError, ValueError) as exc:
                    raise NonConverged(f"refinement failed in [{ms[i]}, {ms[i + 1]}]: {exc}") from exc
                if not info.converged:
                    raise NonConverged(f"refinement did not converge in [{ms[i]}, {ms[i + 1]}]")
            found.append((energy_density(m, params), float(m)))
    if not found:
        raise NonConverged(f"no local minimum bracketed for {params}")
    return found


def minimize(params: ModelParams, n_scan: int = N_SCAN) -> MeanFieldSolution:
    """Global minimiser of the mean-field energy over m_x in [-1, 1]."""
    minima = sorted(_local_minima(params, n_scan))
    e_best = minima[0][0]
    tol = DEGENERACY_TOL * params.J
    ties = [m for e, m in minima if e - e_best <= tol]
    degenerate = len(ties) > 1 and (max(ties) - min(ties)) > 1e-6
    if degenerate and params.omega_x == 0.0:
        m = max(ties)
    else:
        m = minima[0][1]
    eff = EffectiveField.from_magnetization(m, params)
    return MeanFieldSolution(
        m_x=m,
        omega_x_tilde=eff.omega_x_tilde,
        e0=energy_density(m, params),
        m_z=_m_z(eff.omega_x_tilde, params.J),
        n_ph=(params.lam / params.Omega) ** 2 * m * m,
        degenerate_minima=degenerate,
    )


def _is_ordered_z(sol: MeanFieldSolution) -> bool:
    return sol.m_z > 0.0


@dataclass
class PhaseDiagramGrid:
    """Cell-wise mean-field solutions on a (lambda^2/Omega, omega_x) grid.

    Array fields have shape ``(len(omega_x), len(lambda_sq_over_omega))``.
    ``boundary`` holds ``(lambda_sq_over_omega, omega_x, order)`` tuples.
    """

    lambda_sq_over_omega: np.ndarray
    omega_x: np.ndarray
    m_x: np.ndarray
    m_z: np.ndarray
    n_ph: np.ndarray
    e0: np.ndarray
    omega_x_tilde: np.ndarray
    boundary: list = field(default_factory=list)
    params: ModelParams | None = None


def phase_diagram(lambda_sq_grid, omega_x_grid, params_base: ModelParams, workers: int = 1):
    """Minimise on every cell of the grid and extract the zFMN/xFMS boundary.

    ``lambda_sq_grid`` holds values of lambda^2/Omega.  Wherever neighbouring
    cells differ in phase the crossing is bisected along that grid line and
    labelled first order when m_x still jumps by more than ``JUMP_THRESHOLD``
    across the refined bracket.
    """
    lsq = np.asarray(lambda_sq_grid, dtype=float)
    wx = np.asarray(omega_x_grid, dtype=float)
    if lsq.size == 0 or wx.size == 0:
        raise ValueError("grids must be non-empty")
    cells = [(i, j) for i in range(wx.size) for j in range(lsq.size)]

    def solve(cell):
        i, j = cell
        p = params_base.replace(omega_x=float(wx[i]), lam=float(np.sqrt(lsq[j] * params_base.Omega)))
        try:
            return minimize(p)
        except NonConverged as exc:
            raise NonConverged(f"cell (omega_x={wx[i]}, lambda^2/Omega={lsq[j]}): {exc}") from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(solve, cells))
    else:
        sols = [solve(c) for c in cells]
    grid = np.empty((wx.size, lsq.size), dtype=object)
    for (i, j), s in zip(cells, sols):
        grid[i, j] = s

    def arr(name):
        return np.vectorize(lambda s: getattr(s, name), otypes=[float])(grid)

    # Crossings between neighbouring cells, refined along the grid line they sit on.
    crossings = []
    for i in range(wx.size):
        for j in range(lsq.size - 1):
            if _is_ordered_z(grid[i, j]) != _is_ordered_z(grid[i, j + 1]):
                crossings.append(("lambda_sq", i, j, i, j + 1))
    for j in range(lsq.size):
        for i in range(wx.size - 1):
            if _is_ordered_z(grid[i, j]) != _is_ordered_z(grid[i + 1, j]):
                crossings.append(("omega_x", i, j, i + 1, j))

    def refine(c):
        var, i0, j0, i1, j1 = c
        if var == "lambda_sq":
            base = params_base.replace(omega_x=float(wx[i0]))
            a, b = lsq[j0], lsq[j1]
        else:
            base = params_base.replace(lam=float(np.sqrt(lsq[j0] * params_base.Omega)))
            a, b = wx[i0], wx[i1]
        tr = _bisect_crossing(base, var, float(a), float(b), grid[i0, j0], grid[i1, j1],
                              BOUNDARY_XTOL * abs(b - a))
        if var == "lambda_sq":
            return (tr.location, float(wx[i0]), tr.order)
        return (float(lsq[j0]), tr.location, tr.order)

    if workers and workers > 1 and crossings:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            boundary = list(pool.map(refine, crossings))
    else:
        boundary = [refine(c) for c in crossings]
    boundary.sort()
    return PhaseDiagramGrid(
        lambda_sq_over_omega=lsq, omega_x=wx,
        m_x=arr("m_x"), m_z=arr("m_z"), n_ph=arr("n_ph"), e0=arr("e0"),
        omega_x_tilde=arr("omega_x_tilde"), boundary=boundary, params=params_base,
    )


@dataclass(frozen=True)
class Transition:
    order: str
    location: float
    jump: float
    variable: str


def _params_on_ray(params: ModelParams, variable: str, t: float) -> ModelParams:
    if variable == "lambda_sq":
        return params.replace(lam=float(np.sqrt(max(t, 0.0) * params.Omega)))
    if variable == "lam":
        return params.replace(lam=float(t))
    if variable == "omega_x":
        return params.replace(omega_x=float(t))
    raise ValueError(f"unknown ray variable {variable!r}")


def _bisect_crossing(params, variable, a, b, sa, sb, tol) -> Transition:
    """Shrink a bracket with a phase change to width ``tol`` and classify it."""
    while b - a > tol:
        c = 0.5 * (a + b)
        sc = minimize(_params_on_ray(params, variable, c))
        if _is_ordered_z(sc) == _is_ordered_z(sa):
            a, sa = c, sc
        else:
            b, sb = c, sc
    jump = abs(sb.m_x - sa.m_x)
    order = "first" if jump > JUMP_THRESHOLD else "second"
    return Transition(order=order, location=0.5 * (a + b), jump=jump, variable=variable)


def classify_transition(params: ModelParams, variable: str, start: float, stop: float,
                        n_scan: int = 41, xtol: float = 1e-9) -> Transition:
    """Locate and classify the zFMN/xFMS transition along a parameter ray.

    ``variable`` is one of ``"lambda_sq"`` (lambda^2/Omega), ``"lam"`` or
    ``"omega_x"``; all other couplings are taken from ``params``.  The
    crossing is bracketed on ``n_scan`` points and bisected on the phase
    indicator (m_z > 0); the order is first when m_x still jumps by more
    than ``JUMP_THRESHOLD`` across the final bracket.
    """
    ts = np.linspace(start, stop, n_scan)
    sols = [minimize(_params_on_ray(params, variable, t)) for t in ts]
    phase = np.array([_is_ordered_z(s) for s in sols])
    flips = np.flatnonzero(phase[1:] != phase[:-1])
    if flips.size == 0:
        raise NoCrossing(f"no transition along {variable} in [{start}, {stop}]")
    if flips.size > 1:
        raise MultipleCrossings(f"{flips.size} transitions along {variable} in [{start}, {stop}]")
    i = flips[0]
    return _bisect_crossing(params, variable, ts[i], ts[i + 1], sols[i], sols[i + 1],
                            xtol * max(abs(stop - start), 1.0))


def locate_tricritical(params: ModelParams, omega_x_lo: float, omega_x_hi: float,
                       lambda_sq_max: float | None = None, tol: float = 1e-4):
    """Bisect in omega_x for the point where the lambda^2 sweep changes order.

    Expects a first-order crossing at ``omega_x_lo`` and a second-order one at
    ``omega_x_hi``.  Returns ``(lambda_sq_over_omega, omega_x, transition)``
    at the first-order side of the final bracket.
    """
    if lambda_sq_max is None:
        lambda_sq_max = 1.2 * params.J

    def order_at(wx):
        return classify_transition(params.replace(omega_x=float(wx)), "lambda_sq", 0.0, lambda_sq_max)

    lo, hi = order_at(omega_x_lo), order_at(omega_x_hi)
    if lo.order != "first" or hi.order != "second":
        raise NoCrossing(f"no order change between omega_x={omega_x_lo} and {omega_x_hi}")
    a, b = omega_x_lo, omega_x_hi
    tr = lo
    while b - a > tol * params.J:
        c = 0.5 * (a + b)
        tc = order_at(c)
        if tc.order == "first":
            a, tr = c, tc
        else:
            b = c
    return tr.location, a, tr
