"""
How long does the Cauchy problem stay close to the linear flow?
===============================================================

Unit-size data ``cos(j.x)`` evolve under ``v_tt - Delta v + v + delta v^3 = 0``
up to ``T = delta^-A``.  We record the growth of an analytic norm for a
generic seed and for a seed whose frequency is rational (omega = 3), which
fails the genericity test.  This is an observation, not a verdict.
"""

from hyperwave.cauchy import compare_generic_vs_tuned
from hyperwave.genericity import LinearSeed, certify

generic = LinearSeed([(1, 2)], [1.0], 2)
tuned = LinearSeed([(2, 2)], [1.0], 2)
entries = [(s, certify(s).to_dict()) for s in (generic, tuned)]
for s, c in entries:
    print(s.sites, "generic:", c["generic"])

table = compare_generic_vs_tuned(entries, delta=0.05, A=1.2, M=16, checkpoints=8)
for row in table:
    print(f"sites {row['sites']}: max excess {row['max_excess']:.3e}, "
          f"energy drift {row['max_energy_drift']:.1e}")
    for t, excess in row["trajectory"]:
        print(f"   t = {t:7.2f}  excess = {excess:+.3e}")
