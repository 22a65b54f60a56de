"""
Bound polaritons
================

When the band has a gap the cavity behaves like an impurity.  Discrete
states split off below and above the two-excitation continuum when the pole
function F(omega) crosses zero there.  F is finite at both band edges, so
whether a root exists depends on the couplings.
"""
import numpy as np

from dicke_ising import (
    ModelParams, band_edges, coupling_profile_real_space, existence_threshold, find_bound_states,
    minimize, pole_function,
)

J = 0.25
for wx in (0.0, 0.02, 0.05, 0.1, 0.2, 0.5):
    p = ModelParams(omega_x=wx, J=J, lam=0.2)
    sol = minimize(p)
    e = band_edges(sol.field, p)
    states = find_bound_states(sol.field, p)
    text = ", ".join(f"{s.side} {s.omega_b:.5f} (gap {s.gap_to_edge:.4f})" for s in states) or "none"
    print(f"omega_x={wx:4.2f}  band [{e.lower:.4f}, {e.upper:.4f}]  bound states: {text}")

# F just below the lower edge: no divergence, it levels off
p = ModelParams(omega_x=0.3, J=J, lam=0.2)
sol = minimize(p)
e = band_edges(sol.field, p)
for d in (1e-1, 1e-2, 1e-4, 1e-6):
    print(f"F(lower - {d:g}) = {float(pole_function(e.lower - d, sol.field, p)):+.6f}")
print(f"threshold integral 4 lam^2 <eta^2/eps> = {existence_threshold(sol.field, p):.5f}")

# The cavity couples to domain-wall pairs; in real space the weight sits on
# neighbouring walls (single flipped spins) and decays with separation.
j, s = coupling_profile_real_space(sol.field, p, 32)
for jj, ss in zip(j, s):
    if 0 < jj <= 6:
        print(f"separation {jj}: s_j = {ss:+.5f}")
