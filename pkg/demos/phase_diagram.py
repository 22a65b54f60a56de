"""
Mean-field phase diagram
========================

The cavity only talks to the chain through the effective transverse field,
so the ground state follows from minimising a one-variable energy e0(m_x).
This walks through a single minimisation, the two kinds of transition and
a coarse map of the (lambda^2/Omega, omega_x) plane.
"""
import numpy as np

from dicke_ising import ModelParams, classify_transition, energy_density, minimize, phase_diagram

J = 0.25  # 4J = Omega = 1

# One point deep in the superradiant phase: two mirror minima at omega_x = 0
p = ModelParams(omega_x=0.0, J=J, lam=0.5)
sol = minimize(p)
print(f"lam=0.5: m_x={sol.m_x:.4f}  n_ph={sol.n_ph:.4f}  degenerate={sol.degenerate_minima}")

m = np.linspace(-1, 1, 9)
print("e0(m) on a coarse grid:", np.round(energy_density(m, p), 4))

# Along omega_x = 0 the normal phase gives way abruptly
tr = classify_transition(ModelParams(J=J), "lambda_sq", 0.0, 1.2 * J)
print(f"omega_x = 0: {tr.order}-order at lambda^2/(Omega J) = {tr.location / J:.4f}, jump {tr.jump:.3f}")

# Without the cavity the Ising chain orders continuously at omega_x = 2J
tr = classify_transition(ModelParams(J=J), "omega_x", 0.0, 4 * J)
print(f"lam = 0:     {tr.order}-order at omega_x/J = {tr.location / J:.6f}")

# A coarse grid; '#' marks the z-ordered normal phase (m_z > 0)
lsq = np.linspace(0.0, 0.3, 31)
wx = np.linspace(0.0, 1.0, 21)
grid = phase_diagram(lsq, wx, ModelParams(J=J, n_k=1024), workers=4)
print("\nomega_x  (lambda^2/Omega from 0 to 0.3 ->)")
for i in range(wx.size - 1, -1, -1):
    print(f"{wx[i]:5.2f}   " + "".join("#" if mz > 0 else "." for mz in grid.m_z[i]))
firsts = sum(order == "first" for *_, order in grid.boundary)
print(f"{len(grid.boundary)} boundary points, {firsts} labelled first order")
