"""Closed-form propagator of an integrable field checked against two integrators."""
import math

import numpy as np

from spinlie.fields import PolarField, RotatingField, Sinusoid, time_grid
from spinlie.integrability import exact_propagator
from spinlie.oracle import PropagationResult, compare, rk4_propagate, unitary_midpoint_propagate
from spinlie.spinrep import unitarity_defect

t = time_grid(0.0, 10.0, 100000)
cases = {
    "rotating B=1, theta=pi/3, omega=1/2": (RotatingField(1.0, math.pi / 3, 0.5), math.pi / 2),
    "fixed direction, B = 1 + 0.5 sin t": (PolarField(Sinusoid(0.5, 1.0, 0.0, 1.0), math.pi / 5, 0.4), -math.pi / 5),
}
for label, (field, gamma) in cases.items():
    print(label)
    for j in ("1/2", "1", "3/2"):
        P = exact_propagator(field, gamma, j)
        psi0 = np.zeros(P.ops.dim, dtype=complex)
        psi0[0] = 1.0
        exact = PropagationResult(t, P.propagate(psi0, t), "exact", 0.0, 0.0)
        rk = compare(exact, rk4_propagate(field, j, psi0, t))
        mid = compare(exact, unitary_midpoint_propagate(field, j, t, psi0))
        print(f"  j={j:<3} |U(0) - I| = {np.max(np.abs(P(0.0) - np.eye(P.ops.dim))):.1e}"
              f"  unitarity {unitarity_defect(P(t[::1000])):.1e}"
              f"  infidelity vs rk4 {rk.infidelity:.1e}, vs midpoint {mid.infidelity:.1e}")
