"""Which azimuth sign makes the special-case families integrable.

For each family both signs of phi are propagated numerically and compared
with the closed-form propagator built from the same gamma. The sign that
follows from the general integrability condition agrees to round-off; the
opposite sign does not.
"""
import math

import numpy as np

from spinlie.fields import Linear, PolarField, Program, Sinusoid, time_grid
from spinlie.integrability import check_integrability, exact_propagator
from spinlie.oracle import PropagationResult, compare, rk4_propagate


class Ramp(Program):
    """``s cos(theta) (t + 0.5 (1 - cos t))``: the integral of ``s cos(theta) B``."""

    def __init__(self, scale):
        self.scale = scale

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.scale * (t + 0.5 * (1 - np.cos(t)))

    def derivative(self, t):
        return self.scale * (1 + 0.5 * np.sin(np.asarray(t, dtype=float)))


def family(name, s):
    if name == "theta = pi/2, phi_dot = s B cot(gamma)":
        g = math.pi / 3
        return PolarField(1.0, math.pi / 2, Linear(0.0, s / math.tan(g))), g
    if name == "gamma = pi/2, phi = s cos(theta) int B":
        return PolarField(Sinusoid(0.5, 1.0, 0.0, 1.0), math.pi / 3, Ramp(s * math.cos(math.pi / 3))), math.pi / 2
    return PolarField(1.0, Linear(0.0, 1.0), Sinusoid(float(s), 1.0, 0.0, 0.0)), -math.pi / 2


t = time_grid(0.0, 10.0, 10000)
psi0 = np.array([1, 0], dtype=complex)
for name in ("theta = pi/2, phi_dot = s B cot(gamma)", "gamma = pi/2, phi = s cos(theta) int B",
             "theta = t, gamma = -pi/2, phi = s B sin t"):
    print(name)
    for s in (+1, -1):
        field, g = family(name, s)
        P = exact_propagator(field, g, "1/2", strict=False)
        m = compare(PropagationResult(t, P.propagate(psi0, t), "exact", 0.0, 0.0), rk4_propagate(field, "1/2", psi0, t))
        verdict = check_integrability(field, g, t[::10]).verdict
        print(f"  s = {s:+d}: infidelity {m.infidelity:.2e}, condition verdict {verdict}")
