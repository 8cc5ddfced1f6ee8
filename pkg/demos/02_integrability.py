"""Decide integrability of a rotating field and read off gamma and D."""
import math

import numpy as np

from spinlie.fields import RotatingField, time_grid, to_polar_track
from spinlie.integrability import check_integrability, closed_form_D_rotating, compute_D, solve_gamma

field = RotatingField(B=1.0, theta=math.pi / 3, omega=0.5)
grid = time_grid(0.0, 10.0, 1000)

sol = solve_gamma(to_polar_track(field, grid))
print(f"gamma = {sol.gamma:.15f} = {sol.gamma / math.pi:g} pi, branch {sol.branch}")
D = compute_D(1.0, math.pi / 3, sol.gamma)
cf = closed_form_D_rotating(1.0, math.pi / 3, 0.5)
print(f"D = {D:.15f}; closed form gives {cf.D_plus:.15f} and {cf.D_minus:.15f}")
print("matching closed-form branch:", cf.matching_D(sol.branch))

# gamma is fixed only modulo pi: the other representative is also integrable
other = sol.gamma - math.copysign(math.pi, sol.gamma)
print(f"other representative {other:.6f}: D = {compute_D(1.0, math.pi / 3, other):.15f}")

for g in (sol.gamma, other, sol.gamma / 2):
    rep = check_integrability(field, g, grid)
    print(f"gamma {g:+.4f}: differential residual {rep.r_differential:.2e} -> {rep.verdict}")
