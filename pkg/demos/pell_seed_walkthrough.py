"""
The one-mode seed on the circle, from genericity to the spectral gap
====================================================================

A single mode ``cos(x - sqrt(2) t)`` of ``v_tt - v_xx + v + v^3 = 0``.  The
frequency sqrt(2) turns the resonance condition into a Pell equation, so
everything below can be checked by hand.
"""

import numpy as np

from hyperwave.characteristics import (
    Box,
    connected_components,
    diophantine_profile,
    enumerate_characteristics,
)
from hyperwave.genericity import LinearSeed, build_gamma, certify
from hyperwave.operator import assemble_A0, assemble_FprimeN, block_gap, restrict_PA0P, truncated_gap

seed = LinearSeed(sites=[(1,)], amplitudes=[0.01], p=2)

# Genericity is decided in exact arithmetic over Q(sqrt 2).
cert = certify(seed)
for name, verdict in cert.verdicts.items():
    print(f"condition ({name}): {verdict.status}, {verdict.tested} elements tested")

# Characteristic points: n sqrt(2) = -+sqrt(j^2 + 1), i.e. 2 n^2 = j^2 + 1.
box = Box(30, 45)
cs = enumerate_characteristics(seed, box)
print("C_+ :", sorted(cs.plus))

# The stencil Gamma links (-1, 1) on C_+ to its mirror (1, -1) on C_-; all
# other points are isolated.
comps = connected_components(cs, build_gamma(seed))
print("component sizes:", sorted(set(comps.sizes())), "bound B =", comps.bound_B)

# Restricted to those points, A0 has blocks a^2 [[2, 1], [1, 2]] and 2 a^2.
blocks = restrict_PA0P(assemble_A0(seed), cs)
print("pair block:\n", blocks[[len(b.rows) for b in blocks].index(2)].matrix / 0.01 ** 2)
print("PA0P inverse norm:", block_gap(blocks, 0.1, seed.delta, seed.p).inverse_norm)

# Off the characteristics the small divisors shrink slowly with |n|.
prof = diophantine_profile(seed, Box(30, 45))
for N, m, x in prof.table[:6]:
    print(f"N = {N:2d}  m(N) = {m:.6f}  at {x}")
print(f"power-law fit: m(N) >= {prof.cprime:.4f} N^-{prof.q:.3f}")

# The full truncated operator keeps an inverse below N^q / (epsilon delta^p).
op = assemble_FprimeN(seed, N=3, j_radius=10)
rep = truncated_gap(op, seed.delta, 0.1, profile=prof)
print(f"|F'_N^-1| = {rep.inverse_norm:.4g} vs bound {rep.bound:.4g}; "
      f"coupling {rep.coupling_norm:.3e}")
assert rep.passed and np.isfinite(rep.inverse_norm)
