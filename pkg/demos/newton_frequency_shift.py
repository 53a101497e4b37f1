"""
Solving for the quasi-periodic frequency by Newton iteration
============================================================

The nonlinearity shifts the frequency of the Pell mode to
``sqrt(2) + 3 a^2 / (8 sqrt 2) + ...``.  The solver alternates the frequency
(Q) equation with Newton steps on everything else.
"""

import math

from hyperwave.genericity import LinearSeed
from hyperwave.solver import order_fit, scaling_study, solve, synthesize_check

a = 0.01
seed = LinearSeed([(1,)], [a], 2)

art = solve(seed, radius=8)
print("residual history:", ["%.2e" % r for r in art.history])
print("omega          :", art.omega[0])
print("closed form    :", math.sqrt(2) + 3 * a * a / (8 * math.sqrt(2)))

# Leading harmonic generated by v^3: u(-3, 3) = -(a^3/8) / (sqrt10 (sqrt10 - 3 sqrt2)).
print("u(-3, 3)       :", art.u[(-3, 3)],
      -a ** 3 / 8 / (math.sqrt(10) * (math.sqrt(10) - 3 * math.sqrt(2))))

# Back in (t, x) the series solves the PDE to rounding error.
print("sup |PDE residual| on a 64 x 64 grid:", synthesize_check(art))

# In 80-digit arithmetic the quadratic tail becomes visible.
tail = solve(seed, radius=8, precision=80, tol=1e-60)
print("mp residuals   :", ["%.1e" % r for r in tail.history])
print("fitted order   : %.2f" % order_fit(tail.history[-4:]))

# The shift scales like delta^p and the remainder beyond u0 stays below delta^1.5.
study = scaling_study(seed, [1e-2, 5e-3, 2.5e-3])
for row in study["rows"]:
    print(f"delta = {row['delta']:.4f}  shift = {row['shift'][0]:.3e}  "
          f"remainder = {row['remainder']:.3e}")
print("shift slope %.3f, remainder slope %.3f" % (study["shift_slopes"][0],
                                                  study["remainder_slope"]))
