"""Integrability and exact propagation of time-dependent spin Hamiltonians.

``H(t) = B(t) . S`` is treated as a Lie system on SU(2). When the field
satisfies the integrability conditions for some constant ``gamma``, a curve in
the family ``A_gamma`` turns it into ``D(t) S_z`` and the propagator has a
closed form. Every closed form can be checked against the numerical
integrators in :mod:`spinlie.oracle`.

Modules
-------
su2            group and algebra of SU(2) in quaternion coordinates
spinrep        spin-j matrices and unitary exponentials
fields         magnetic field models and polar decomposition
liesys         group equation, transformation system, curve transformation
integrability  gamma, D, connecting curves and exact propagators
oracle         reference Schroedinger integrators and metrics
scenario, cli  JSON scenarios and the ``spinlie`` command
"""
__version__ = "0.1.0"

from . import fields, integrability, liesys, oracle, spinrep, su2  # noqa: E402
from .exceptions import (  # noqa: E402
    BranchError,
    ConsistencyError,
    DegenerateFieldError,
    InvalidArgumentError,
    PoleError,
    PreconditionError,
    RangeError,
    SpinLieError,
)
from .fields import ConstantField, PolarField, RotatingField, CartesianTable  # noqa: E402
from .integrability import (  # noqa: E402
    check_integrability,
    closed_form_D_rotating,
    compute_D,
    connecting_curve,
    exact_propagator,
    solve_gamma,
)
from .spinrep import build_spin_operators  # noqa: E402

__all__ = [
    "__version__",
    "su2",
    "spinrep",
    "fields",
    "liesys",
    "integrability",
    "oracle",
    "SpinLieError",
    "InvalidArgumentError",
    "BranchError",
    "DegenerateFieldError",
    "RangeError",
    "PoleError",
    "PreconditionError",
    "ConsistencyError",
    "ConstantField",
    "RotatingField",
    "PolarField",
    "CartesianTable",
    "build_spin_operators",
    "solve_gamma",
    "compute_D",
    "closed_form_D_rotating",
    "check_integrability",
    "connecting_curve",
    "exact_propagator",
]
