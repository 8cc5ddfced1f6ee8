"""Invariant suite run by ``spinlie selftest``.

Every check returns a :class:`Check`; :func:`run_selftest` collects them by
group. The matrix commutator can be swapped out through the ``bracket``
argument, which is how the suite is shown to catch a sign error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import fields, integrability, liesys, oracle, spinrep, su2

__all__ = ["Check", "run_selftest", "format_checks", "GROUPS"]


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.group:<14} {self.name:<40} {self.value:.3e}  (limit {self.limit:.1e})"


def commutator(X, Y):
    return X @ Y - Y @ X


_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_i, _j, _k] = 1.0
    _EPS[_j, _i, _k] = -1.0


def _check(group, name, value, limit, below=True) -> Check:
    value = float(value)
    ok = value < limit if below else value > limit
    return Check(group, name, bool(ok and math.isfinite(value)), value, limit)


def _algebra(bracket) -> list:
    a = su2.BASIS
    err = 0.0
    for j in range(3):
        for k in range(3):
            expected = -np.einsum("l,lij->ij", _EPS[j, k], a)
            err = max(err, np.max(np.abs(bracket(a[j], a[k]) - expected)))
    rng = np.random.default_rng(11)
    c, d = rng.normal(size=(2, 3))
    vec = su2.bracket(su2.AlgebraVector.from_array(c), su2.AlgebraVector.from_array(d)).as_array()
    mat = su2.project_algebra(bracket(su2.algebra_matrix(c), su2.algebra_matrix(d)))
    return [
        _check("su2", "bracket table [a_j,a_k] = -eps a_l", err, 1e-14),
        _check("su2", "vector bracket matches matrices", np.max(np.abs(vec - mat)), 1e-13),
    ]


def _group(bracket) -> list:
    rng = np.random.default_rng(12)
    exp_err = hom_err = log_err = 0.0
    for _ in range(20):
        c = rng.normal(size=3)
        d = rng.normal(size=3)
        # exp of a matrix through a truncated Taylor series of a scaled copy
        A = su2.algebra_matrix(c) / 64.0
        term, acc = np.eye(2, dtype=complex), np.eye(2, dtype=complex)
        for n in range(1, 20):
            term = term @ A / n
            acc = acc + term
        for _ in range(6):
            acc = acc @ acc
        exp_err = max(exp_err, np.max(np.abs(su2.to_matrix(su2.exp_coords(c)) - acc)))
        g = su2.exp_coords(c)
        G = su2.to_matrix(g)
        lhs = su2.adjoint_coords(g, d)
        rhs = su2.project_algebra(G @ su2.algebra_matrix(d) @ G.conj().T)
        hom_err = max(hom_err, np.max(np.abs(lhs - rhs)))
        if np.linalg.norm(c) < 0.9 * 2 * math.pi:
            log_err = max(log_err, np.max(np.abs(su2.exp_coords(su2.log_coords(g)) - g)))
    return [
        _check("su2", "exp matches matrix series", exp_err, 1e-12),
        _check("su2", "adjoint is conjugation", hom_err, 1e-13),
        _check("su2", "exp(log g) = g", log_err, 1e-12),
    ]


def _spin(bracket) -> list:
    out = []
    for two_j in (1, 2, 3, 4):
        ops = spinrep.build_spin_operators(two_j)
        iS = 1j * ops.vector
        err = 0.0
        for j in range(3):
            for k in range(3):
                expected = -np.einsum("l,lij->ij", _EPS[j, k], iS)
                err = max(err, np.max(np.abs(bracket(iS[j], iS[k]) - expected)))
        j = two_j / 2
        cas = np.einsum("kij,kjl->il", ops.vector, ops.vector)
        cas_err = np.max(np.abs(cas - j * (j + 1) * np.eye(ops.dim)))
        out.append(_check("spinrep", f"commutators j={ops.j}", err, 1e-12))
        out.append(_check("spinrep", f"Casimir j={ops.j}", cas_err, 1e-12))
    ops = spinrep.build_spin_operators(3)
    rng = np.random.default_rng(13)
    c, d = 0.6 * rng.normal(size=(2, 3))
    g, h = su2.exp_coords(c), su2.exp_coords(d)
    hom = spinrep.represent(su2.compose_coords(g, h), ops) - spinrep.represent(g, ops) @ spinrep.represent(h, ops)
    out.append(_check("spinrep", "representation is multiplicative j=3/2", np.max(np.abs(hom)), 1e-12))
    return out


def _generators(bracket) -> list:
    gs = liesys.generator_set()

    def vf(A, B):
        # bracket of linear vector fields is minus the matrix commutator
        return -bracket(A, B)

    err = 0.0
    for j in range(3):
        for k in range(3):
            for mats in (gs.N, gs.Np):
                expected = -np.einsum("l,lij->ij", _EPS[j, k], mats)
                err = max(err, np.max(np.abs(vf(mats[j], mats[k]) - expected)))
            err = max(err, np.max(np.abs(vf(gs.N[j], gs.Np[k]))))
    rng = np.random.default_rng(14)
    b, bp = rng.normal(size=(2, 3))
    M = liesys.fsys_matrix(b, bp)
    decomp = M - np.einsum("k,kij->ij", b, gs.N) - np.einsum("k,kij->ij", bp, gs.Np)
    E = liesys.expm_fsys(b, bp, 0.37)
    return [
        _check("liesys", "generator table", err, 1e-14),
        _check("liesys", "FSys matrix antisymmetric", np.max(np.abs(M + M.T)), 1e-15),
        _check("liesys", "FSys = sum b N + b' N'", np.max(np.abs(decomp)), 1e-15),
        _check("liesys", "exp of FSys is orthogonal", np.max(np.abs(E.T @ E - np.eye(4))), 1e-14),
    ]


def _first_integral(bracket) -> list:
    f = fields.PolarField(
        fields.Sinusoid(0.4, 1.3, 0.2, 1.0), fields.Sinusoid(0.5, 0.7, 0.0, 1.2), fields.Linear(0.1, 0.8)
    )
    target = fields.RotatingField(0.8, 0.9, -0.3)
    grid = np.linspace(0.0, 10.0, 10001)
    x0 = su2.exp_coords(np.array([0.3, -0.2, 0.5]))
    tr = liesys.solve_fsys(f, target, x0, grid)
    drift = np.max(np.abs(tr.first_integral() - 1.0))
    g = liesys.solve_group_equation(f, grid)
    gp = liesys.solve_group_equation(target, grid)
    composed = su2.compose_coords(su2.compose_coords(gp.coords, x0), su2.inverse_coords(g.coords))
    return [
        _check("first-integral", "|I(x(t)) - 1| along FSys", drift, 1e-10),
        _check("first-integral", "FSys = g'(t) gbar(0) g(t)^-1", np.max(np.abs(tr.coords - composed)), 1e-6),
    ]


def _flow(bracket) -> list:
    rng = np.random.default_rng(15)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A, B = A + A.conj().T, B + B.conj().T
    As, Bs = -1j * A, -1j * B

    def C(s):
        e = lambda X, u: spinrep.exp_hermitian(1j * X, u)  # noqa: E731
        return e(Bs, -s) @ e(As, -s) @ e(Bs, s) @ e(As, s)

    errs = []
    for t in (0.04, 0.02, 0.01):
        second = (C(t) + C(-t) - 2 * np.eye(3)) / t**2
        target = 2 * bracket(Bs, As)
        errs.append(np.max(np.abs(second - target)) / np.max(np.abs(target)))
    ratio = errs[-2] / errs[-1]
    return [
        _check("flow", "second difference -> 2[B,A] (relative)", errs[-1], 1e-2),
        _check("flow", "error ratio under halving ~ 4", abs(math.log2(ratio) - 2.0), 0.3),
    ]


def _orders(bracket) -> list:
    f = fields.RotatingField(1.0, math.pi / 3, 0.5)
    T = 2.0
    ref = oracle.rk4_propagate(f, 1, [1, 0], np.linspace(0, T, 4097)).final
    e_rk, e_mid, e_grp = [], [], []
    sol = integrability.solve_gamma(fields.to_polar_track(f, np.linspace(0, T, 201)))
    exact = integrability.exact_propagator(f, sol, 1, grid=np.linspace(0, T, 201))
    for n in (40, 80, 160, 320):
        grid = np.linspace(0, T, n + 1)
        e_rk.append(np.linalg.norm(oracle.rk4_propagate(f, 1, [1, 0], grid).final - ref))
        e_mid.append(np.linalg.norm(oracle.unitary_midpoint_propagate(f, 1, grid, [1, 0]).final - ref))
        Ug = spinrep.represent(liesys.solve_group_equation(f, grid).coords[-1], exact.ops)
        e_grp.append(np.max(np.abs(Ug - exact(T))))
    out = []
    for name, errs, lo, hi in (("rk4", e_rk, 3.7, 4.3), ("unitary midpoint", e_mid, 1.7, 2.3), ("group midpoint", e_grp, 1.7, 2.3)):
        orders = oracle.observed_orders(errs)
        worst = float(np.max(np.abs(orders - 0.5 * (lo + hi))))
        out.append(_check("orders", f"{name} order in [{lo}, {hi}]", worst, 0.5 * (hi - lo) + 1e-12))
    return out


def _integrability(bracket) -> list:
    f = fields.RotatingField(1.0, math.pi / 3, 0.5)
    grid = np.linspace(0.0, 10.0, 2001)
    sol = integrability.solve_gamma(fields.to_polar_track(f, grid))
    if sol is None:
        return [Check("integrability", "rotating field has constant gamma", False, float("nan"), 0.0)]
    D = integrability.compute_D(1.0, math.pi / 3, sol.gamma)
    closed = integrability.closed_form_D_rotating(1.0, math.pi / 3, 0.5).matching_D(sol.branch)
    P = integrability.exact_propagator(f, sol, 1, grid=grid)
    mid = oracle.unitary_midpoint_propagate(f, 1, np.linspace(0, 10, 20001))
    U = P(mid.times)
    return [
        _check("integrability", "gamma = pi/2", abs(sol.gamma - math.pi / 2), 1e-9),
        _check("integrability", "D matches closed-form branch", abs(D - closed), 1e-12),
        _check("integrability", "U(0) = I", np.max(np.abs(P(0.0) - np.eye(2))), 1e-12),
        _check("integrability", "exact vs midpoint propagator", np.max(np.abs(U - mid.values)), 1e-6),
        _check("integrability", "exact propagator unitary", spinrep.unitarity_defect(U), 1e-10),
    ]


GROUPS = (
    ("su(2) algebra", _algebra),
    ("SU(2) group", _group),
    ("spin representations", _spin),
    ("transformation generators", _generators),
    ("first integral", _first_integral),
    ("flow commutator", _flow),
    ("convergence orders", _orders),
    ("integrability", _integrability),
)


def run_selftest(bracket: Optional[Callable] = None) -> list:
    """Run every invariant group; returns the list of :class:`Check` results.

    Parameters
    ----------
    bracket : callable, optional
        Matrix commutator used by the algebra checks (default ``XY - YX``).
    """
    bracket = commutator if bracket is None else bracket
    checks = []
    for _, fn in GROUPS:
        checks.extend(fn(bracket))
    return checks


def format_checks(checks) -> str:
    lines = [c.line() for c in checks]
    failed = [c for c in checks if not c.passed]
    groups = len({c.group for c in checks})
    lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed in {groups} groups")
    return "\n".join(lines)
