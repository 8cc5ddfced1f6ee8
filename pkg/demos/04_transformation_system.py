"""The transformation system keeps A_gamma invariant exactly when the field is integrable."""
import math

import numpy as np

from spinlie import su2
from spinlie.fields import RotatingField, time_grid
from spinlie.integrability import compute_D
from spinlie.liesys import AxisZ, solve_fsys

gamma = math.pi / 2
D = compute_D(1.0, math.pi / 3, gamma)
x0 = su2.a_gamma_coords(gamma, 0.0)
t = time_grid(0.0, 10.0, 100000)

for omega in (0.5, 0.55):
    c = solve_fsys(RotatingField(1.0, math.pi / 3, omega), AxisZ(D), x0, t).coords
    print(f"omega {omega}: max|y1| = {np.max(np.abs(c[:, 2])):.2e}, "
          f"max|x1 - cos(gamma/2)| = {np.max(np.abs(c[:, 0] - math.cos(gamma / 2))):.2e}, "
          f"max|I - 1| = {np.max(np.abs(np.sum(c**2, axis=1) - 1)):.1e}")
