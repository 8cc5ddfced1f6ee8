r"""Integrability of spin Hamiltonians through curves in ``A_gamma``.

A field ``B(t) = B (sin th cos phi, sin th sin phi, cos th)`` is reduced to
``H'(t) = D(t) S_z`` by the curve ``gbar(t) = A_gamma(phi(t))`` exactly when

.. math::

    \dot\phi = B\,\frac{\sin(\theta + \gamma)}{\sin\gamma},
    \qquad
    D = B\,\frac{\cos(\gamma/2 + \theta)}{\cos(\gamma/2)},

with ``gamma`` constant. The propagator is then

.. math::

    U(t) = W(t)\, e^{-i\Theta(t) S_z}\, W(0)^{-1},\qquad
    W(t) = \Phi(\bar g(t)^{-1}),\quad \Theta(t) = \int_0^t D .

``gamma`` is only fixed modulo ``pi`` by the differential condition; the
two representatives give the two branches of ``D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import su2
from .exceptions import (
    DegenerateFieldError,
    InvalidArgumentError,
    PoleError,
    PreconditionError,
)
from .fields import (
    CartesianTable,
    ConstantField,
    FieldSpec,
    PolarField,
    PolarTrack,
    RotatingField,
    eval_cartesian,
    polar_functions,
    to_polar_track,
)
from .liesys import AGammaCurve
from .spinrep import SpinOperators, build_spin_operators, represent

__all__ = [
    "GammaSolution",
    "IntegrabilityReport",
    "ClosedFormD",
    "ExactPropagator",
    "gamma_branch",
    "solve_gamma",
    "compute_D",
    "closed_form_D_rotating",
    "check_integrability",
    "connecting_curve",
    "exact_propagator",
    "default_check_grid",
    "cumulative_simpson",
]

SIN_GAMMA_MIN = 1e-9
GAMMA_CONSTANCY_TOL = 1e-8
SIMPSON_MAX_PANEL = 1e-3


def gamma_branch(gamma: float, B, theta, phi_dot) -> str:
    """Sign of the root in ``tan(gamma/2) = (cos th - phi_dot/B +/- sqrt(...)) / sin th``.

    With ``tau = tan(gamma/2)`` one has ``D = B (cos th - tau sin th)``, so the
    ``+`` root is the one with ``phi_dot - D = +sqrt(...) >= 0``. The sign is
    read off the median over the samples given.
    """
    D = compute_D(np.asarray(B, dtype=float), np.asarray(theta, dtype=float), gamma)
    gap = np.asarray(phi_dot, dtype=float) - D
    return "plus" if float(np.median(gap)) >= 0.0 else "minus"


@dataclass(frozen=True)
class GammaSolution:
    """Constant angle of the connecting ``A_gamma`` family.

    ``gamma`` lies in ``(-pi, pi)`` minus zero; ``constancy_residual`` is the
    largest deviation (modulo ``pi``) of the per-sample solutions from it.
    """

    gamma: float
    branch: str
    constancy_residual: float

    def __post_init__(self):
        if abs(math.sin(self.gamma)) <= SIN_GAMMA_MIN:
            raise InvalidArgumentError("sin(gamma) must be non-zero")


def _wrap_half_pi(x):
    """Reduce modulo pi into ``[-pi/2, pi/2)``."""
    return (x + 0.5 * np.pi) % np.pi - 0.5 * np.pi


def _differential_residual(track: PolarTrack, gamma: float, mask) -> float:
    pred = track.B * np.sin(track.theta + gamma) / math.sin(gamma)
    r = np.abs(track.phi_dot - pred)[mask]
    return float(np.max(r, initial=0.0))


def solve_gamma(track: PolarTrack, tol: float = GAMMA_CONSTANCY_TOL) -> Optional[GammaSolution]:
    """Solve ``tan(gamma) = sin(theta) / (phi_dot/B - cos(theta))`` for a constant ``gamma``.

    Returns ``None`` when the per-sample solutions are not constant within
    ``tol`` (modulo ``pi``) or when ``sin(gamma)`` vanishes.

    Raises
    ------
    DegenerateFieldError
        If every sample is degenerate.
    """
    usable = ~track.degenerate & (track.B != 0)
    if not np.any(usable):
        raise DegenerateFieldError("no non-degenerate samples to solve for gamma")
    B = track.B[usable]
    th = track.theta[usable]
    samples = np.arctan2(np.sin(th), track.phi_dot[usable] / B - np.cos(th)) % np.pi
    # circular mean on the doubled angle handles the wrap at 0 ~ pi
    mean = float(np.angle(np.mean(np.exp(2j * samples))) / 2.0) % np.pi
    residual = float(np.max(np.abs(_wrap_half_pi(samples - mean))))
    if residual > tol or abs(math.sin(mean)) <= SIN_GAMMA_MIN:
        return None
    candidates = [mean, mean - math.pi]
    # both representatives satisfy the differential condition equally well;
    # ties keep the one in (0, pi)
    scores = [_differential_residual(track, g, ~track.degenerate) for g in candidates]
    gamma = candidates[1] if scores[1] < scores[0] - 1e-12 else candidates[0]
    return GammaSolution(gamma, gamma_branch(gamma, B, th, track.phi_dot[usable]), residual)


def compute_D(B, theta, gamma):
    """``D = B cos(gamma/2 + theta) / cos(gamma/2)``.

    Raises
    ------
    PoleError
        If ``cos(gamma/2)`` vanishes (``gamma`` within 1e-9 of an odd multiple of pi).
    """
    g = np.asarray(gamma, dtype=float)
    c = np.cos(0.5 * g)
    if np.any(np.abs(c) <= math.sin(0.5e-9)):
        raise PoleError(f"D has a pole at gamma = {gamma!r}")
    out = np.asarray(B, dtype=float) * np.cos(0.5 * g + np.asarray(theta, dtype=float)) / c
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class ClosedFormD:
    """Both branches ``D = omega +/- sqrt(omega^2 - 2 omega B cos(theta) + B^2)``.

    ``gamma_plus`` / ``gamma_minus`` are the angles from the ``+`` / ``-`` roots
    of the ``tan(gamma/2)`` quadratic (``None`` when ``B sin(theta) = 0``). The
    ``+`` root yields ``D_minus`` and vice versa; :meth:`matching_D` does the
    bookkeeping.
    """

    D_plus: float
    D_minus: float
    gamma_plus: Optional[float]
    gamma_minus: Optional[float]

    def matching_D(self, branch: str) -> float:
        """``D`` produced by the ``gamma`` of the given ``tan(gamma/2)`` root."""
        if branch == "plus":
            return self.D_minus
        if branch == "minus":
            return self.D_plus
        raise InvalidArgumentError(f"branch must be 'plus' or 'minus', got {branch!r}")


def closed_form_D_rotating(B: float, theta: float, omega: float) -> ClosedFormD:
    """Constant ``D`` of the rotating field in closed form, with the matching ``gamma`` roots."""
    # (omega - B cos th)^2 + (B sin th)^2 is the discriminant, never negative
    disc = (omega - B * math.cos(theta)) ** 2 + (B * math.sin(theta)) ** 2
    root = math.sqrt(disc)
    if B == 0.0 or abs(math.sin(theta)) < 1e-15:
        g_plus = g_minus = None
    else:
        base = -omega / B + math.cos(theta)
        scale = root / abs(B)
        g_plus = 2.0 * math.atan((base + scale) / math.sin(theta))
        g_minus = 2.0 * math.atan((base - scale) / math.sin(theta))
    return ClosedFormD(omega + root, omega - root, g_plus, g_minus)


@dataclass(frozen=True, eq=False)
class IntegrabilityReport:
    """Residuals of the integrability conditions for one ``(field, gamma)`` pair.

    ``r_algebraic_1`` and ``r_algebraic_2`` are the two algebraic conditions
    evaluated on ``A_gamma(phi(t))`` with ``D`` from :func:`compute_D`;
    ``r_differential`` is ``max |phi_dot - B sin(theta + gamma)/sin(gamma)|``.
    Degenerate samples are excluded from all maxima.
    """

    gamma: Optional[GammaSolution]
    gamma_value: Optional[float]
    times: np.ndarray
    r_algebraic_1: float
    r_algebraic_2: float
    r_differential: float
    D_samples: np.ndarray
    verdict: str
    tolerance: float
    excluded: int = 0
    notes: list = field(default_factory=list)

    @property
    def integrable(self) -> bool:
        return self.verdict == "integrable"

    def to_dict(self) -> dict:
        d = {
            "verdict": self.verdict,
            "gamma": self.gamma_value,
            "branch": self.gamma.branch if self.gamma else None,
            "gamma_constancy_residual": self.gamma.constancy_residual if self.gamma else None,
            "r_algebraic_1": self.r_algebraic_1,
            "r_algebraic_2": self.r_algebraic_2,
            "r_differential": self.r_differential,
            "tolerance": self.tolerance,
            "excluded_samples": self.excluded,
            "notes": list(self.notes),
        }
        if self.D_samples.size:
            d["D_min"] = float(np.min(self.D_samples))
            d["D_max"] = float(np.max(self.D_samples))
        return d


def default_check_grid(f: FieldSpec, points: int = 2001) -> np.ndarray:
    lo, hi = f.time_range()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = max(lo, 0.0), min(hi, 10.0)
    return np.linspace(lo, hi, points)


def _degenerate_report(times, gamma_value, tol, note) -> IntegrabilityReport:
    nan = float("nan")
    return IntegrabilityReport(None, gamma_value, times, nan, nan, nan, np.empty(0), "degenerate", tol, times.size, [note])


def check_integrability(
    field: FieldSpec,
    gamma,
    grid,
    tol: Optional[float] = None,
) -> IntegrabilityReport:
    """Evaluate both algebraic and the differential condition on ``grid``.

    ``gamma`` is a float or a :class:`GammaSolution`. The default tolerance is
    ``1e-8 * (max|B| + max|phi_dot|)`` over the non-degenerate samples.
    """
    sol = gamma if isinstance(gamma, GammaSolution) else None
    g = float(sol.gamma if sol else gamma)
    if not math.isfinite(g) or abs(math.sin(g)) <= SIN_GAMMA_MIN:
        raise InvalidArgumentError("gamma must be finite with sin(gamma) != 0")
    times = np.asarray(grid, dtype=float)
    try:
        track = to_polar_track(field, times)
    except DegenerateFieldError as exc:
        return _degenerate_report(times, g, float("nan") if tol is None else tol, str(exc))
    mask = ~track.degenerate
    if not np.any(mask):
        return _degenerate_report(times, g, float("nan") if tol is None else tol, "azimuth undefined on the whole grid")

    b = eval_cartesian(field, times)
    x1 = math.cos(0.5 * g)
    s = math.sin(0.5 * g)
    x2 = -s * np.cos(track.phi)
    y2 = s * np.sin(track.phi)
    D = compute_D(track.B, track.theta, g)
    r1 = np.abs(-b[:, 1] * x2 - b[:, 0] * y2)[mask]
    r2 = np.abs((b[:, 2] - D) * x1 + b[:, 0] * x2 - b[:, 1] * y2)[mask]
    rd = _differential_residual(track, g, mask)
    if tol is None:
        tol = 1e-8 * (float(np.max(np.abs(track.B[mask]))) + float(np.max(np.abs(track.phi_dot[mask]))))
    r1m, r2m = float(np.max(r1)), float(np.max(r2))
    ok = r1m < tol and r2m < tol and rd < tol
    if sol is not None:
        ok = ok and sol.constancy_residual <= GAMMA_CONSTANCY_TOL
    notes = []
    if not isinstance(field, (RotatingField, PolarField, ConstantField)):
        notes.append("azimuth derivative from finite differences")
    return IntegrabilityReport(
        sol or GammaSolution(g, gamma_branch(g, track.B[mask], track.theta[mask], track.phi_dot[mask]), 0.0),
        g,
        times,
        r1m,
        r2m,
        rd,
        np.asarray(D, dtype=float) + 0.0 * times,
        "integrable" if ok else "not_integrable",
        float(tol),
        int(np.count_nonzero(~mask)),
        notes,
    )


def _require_integrable(field, gamma, grid, tol):
    grid = default_check_grid(field) if grid is None else grid
    report = check_integrability(field, gamma, grid, tol)
    if not report.integrable:
        raise PreconditionError(
            f"field is {report.verdict} for gamma = {report.gamma_value!r} "
            f"(r_differential = {report.r_differential:.3e}, tolerance {report.tolerance:.3e})"
        )
    return report


def connecting_curve(field: FieldSpec, gamma, grid=None, strict: bool = True, tol=None) -> AGammaCurve:
    """The curve ``t -> A_gamma(phi(t))`` reducing the field to the z axis.

    With ``strict`` (the default) the integrability conditions are checked on
    ``grid`` first and :class:`PreconditionError` is raised if they fail.
    """
    g = float(gamma.gamma if isinstance(gamma, GammaSolution) else gamma)
    if strict:
        _require_integrable(field, g, grid, tol)
    pf = polar_functions(field)
    return AGammaCurve(g, pf.phi, pf.phi_dot)


def cumulative_simpson(f, times, origin: float = 0.0, max_panel: float = SIMPSON_MAX_PANEL) -> np.ndarray:
    """``int_origin^t f`` for every ``t`` in ``times`` by composite Simpson.

    Every gap between consecutive sorted nodes is split into panels no wider
    than ``max_panel``; the error is ``O(max_panel^4)``.
    """
    t = np.asarray(times, dtype=float)
    flat = t.ravel()
    nodes, inverse = np.unique(np.concatenate([[origin], flat]), return_inverse=True)
    if nodes.size == 1:
        return np.zeros_like(t)
    gaps = np.diff(nodes)
    k = np.maximum(1, np.ceil(gaps / max_panel).astype(int))
    starts = np.concatenate([[0], np.cumsum(k)[:-1]])
    owner = np.repeat(np.arange(gaps.size), k)
    j = np.arange(owner.size) - np.repeat(starts, k)
    w = (gaps / k)[owner]
    a = nodes[:-1][owner] + j * w
    panels = w / 6.0 * (f(a) + 4.0 * f(a + 0.5 * w) + f(a + w))
    cumulative = np.concatenate([[0.0], np.cumsum(np.add.reduceat(panels, starts))])
    values = cumulative - cumulative[inverse[0]]
    return values[inverse[1:]].reshape(t.shape)


@dataclass(frozen=True, eq=False)
class ExactPropagator:
    """Closed-form propagator of an integrable field.

    Call it with a time (or an array of times) to get ``U(t)`` (stacked for
    arrays). ``U(origin)`` is the identity.
    """

    ops: SpinOperators
    gamma: float
    field: FieldSpec
    curve: AGammaCurve
    origin: float
    _polar: object = field(repr=False)
    _theta_closed: Optional[object] = field(repr=False, default=None)

    def D(self, t):
        t = np.asarray(t, dtype=float)
        return compute_D(self._polar.B(t), self._polar.theta(t), self.gamma)

    def theta(self, t):
        """``Theta(t) = int_origin^t D``; closed form where available, Simpson otherwise."""
        t = np.asarray(t, dtype=float)
        if self._theta_closed is not None:
            out = self._theta_closed(t) - self._theta_closed(np.asarray(self.origin))
        else:
            out = cumulative_simpson(self.D, t, self.origin)
        return out if np.ndim(out) else float(out)

    @property
    def closed_form_theta(self) -> bool:
        return self._theta_closed is not None

    def W(self, t) -> np.ndarray:
        """``Phi(gbar(t)^-1)``."""
        return represent(su2.inverse_coords(self.curve.coords(t)), self.ops)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        W = self.W(t)
        W0_inv = np.conj(self.W(self.origin)).T
        phases = np.exp(-1j * np.asarray(self.theta(t))[..., None] * self.ops.m_values)
        return (W * phases[..., None, :]) @ W0_inv

    def propagate(self, psi0, times) -> np.ndarray:
        """States ``U(t) psi0`` for each time; shape ``(n, d)``."""
        psi0 = np.asarray(psi0, dtype=complex)
        return self(np.asarray(times, dtype=float)) @ psi0


def _closed_theta(field: FieldSpec, gamma: float):
    """Antiderivative of ``D`` when one exists in closed form."""
    factor_of = lambda th: math.cos(0.5 * gamma + th) / math.cos(0.5 * gamma)  # noqa: E731
    if isinstance(field, RotatingField):
        D = field.B * factor_of(field.theta)
        return lambda t: D * t
    if isinstance(field, ConstantField):
        B = math.sqrt(field.Bx**2 + field.By**2 + field.Bz**2)
        th = math.acos(field.Bz / B) if B > 0 else 0.0
        D = B * factor_of(th)
        return lambda t: D * t
    if isinstance(field, PolarField) and field.theta.is_constant():
        anti = field.B.antiderivative
        if anti(np.asarray(0.0)) is not None:
            factor = factor_of(float(field.theta(0.0)))
            return lambda t: factor * anti(t)
    return None


def exact_propagator(
    field: FieldSpec,
    gamma,
    j,
    grid=None,
    strict: bool = True,
    tol=None,
    origin: Optional[float] = None,
) -> ExactPropagator:
    """Build ``U(t) = W(t) exp(-i Theta(t) S_z) W(origin)^-1``.

    Parameters
    ----------
    field : FieldSpec
    gamma : float or GammaSolution
    j : spin quantum number (anything :func:`build_spin_operators` accepts)
    grid : array_like, optional
        Grid for the integrability check run when ``strict`` is true.
    strict : bool
        Set to ``False`` to build the formula without checking the
        conditions (used to test candidate fields).
    origin : float, optional
        Initial time; ``0`` unless the field is a table not covering it.
    """
    g = float(gamma.gamma if isinstance(gamma, GammaSolution) else gamma)
    if strict:
        _require_integrable(field, g, grid, tol)
    ops = build_spin_operators(j)
    compute_D(1.0, 0.0, g)  # pole check
    lo, hi = field.time_range()
    if origin is None:
        origin = 0.0 if lo <= 0.0 <= hi else lo
    pf = polar_functions(field)
    curve = AGammaCurve(g, pf.phi, pf.phi_dot)
    closed = _closed_theta(field, g)
    if isinstance(field, CartesianTable):
        closed = None
    return ExactPropagator(ops, g, field, curve, float(origin), pf, closed)
