"""The su(2) algebra, its group and its spin-j representations."""
import math

import numpy as np

from spinlie import su2
from spinlie.liesys import generator_set, vector_field_bracket
from spinlie.spinrep import build_spin_operators, represent

e1, e2, e3 = (su2.AlgebraVector.from_array(v) for v in np.eye(3))
print("[a1, a2] =", su2.bracket(e1, e2).as_array(), "(that is -a3)")

g = su2.exp_algebra(e3 * (math.pi / 2))
print("Ad(exp(pi/2 a3)) a1 =", np.round(su2.adjoint(g, e1).as_array(), 15))

gs = generator_set()
print("[N1, N2] + N3 =", np.max(np.abs(vector_field_bracket(gs.N[0], gs.N[1]) + gs.N[2])))
print("[N1, N'2]     =", np.max(np.abs(vector_field_bracket(gs.N[0], gs.Np[1]))))

for j in ("1/2", "1", "3/2"):
    ops = build_spin_operators(j)
    cas = sum(S @ S for S in ops.vector)
    print(f"j={j}: dim {ops.dim}, S^2 = {cas[0, 0].real:g} I, Phi(exp(pi/2 a3)) diagonal",
          np.round(np.diag(represent(g, ops)), 12))
