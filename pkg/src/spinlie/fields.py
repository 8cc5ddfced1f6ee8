"""Time-dependent magnetic fields ``B(t)`` and their polar decomposition.

Fields come in four flavours, all evaluable on scalars or numpy arrays of
times:

* :class:`ConstantField` -- ``(Bx, By, Bz)``
* :class:`RotatingField` -- ``B (sin th cos(w t + phi0), sin th sin(w t + phi0), cos th)``
* :class:`PolarField` -- ``B(t), theta(t), phi(t)`` given by scalar programs
* :class:`CartesianTable` -- samples with linear interpolation

The polar angle of the canonical decomposition is ``arccos(Bz/B)`` in
``[0, pi]`` and the azimuth is kept unwrapped on the real line. A
:class:`PolarField` keeps its programs as given, so ``theta`` may leave
``[0, pi]`` and ``B`` may change sign; the integrability formulas are
invariant under that reparametrisation as long as it is used consistently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateFieldError, InvalidArgumentError, RangeError

__all__ = [
    "Program",
    "Const",
    "Linear",
    "Sinusoid",
    "Table",
    "as_program",
    "FieldSpec",
    "ConstantField",
    "RotatingField",
    "PolarField",
    "CartesianTable",
    "PolarTrack",
    "eval_cartesian",
    "to_polar_track",
    "phi_dot",
    "polar_functions",
    "time_grid",
]

FD_REL_STEP = 1e-6
DEGENERATE_REL = 1e-12


def time_grid(t0: float, t1: float, steps: int) -> np.ndarray:
    """Uniform grid with ``steps`` intervals (``steps + 1`` points)."""
    if steps < 1 or not t1 > t0:
        raise InvalidArgumentError("grid needs t1 > t0 and at least one step")
    return np.linspace(t0, t1, int(steps) + 1)


def _fd_step(t):
    return FD_REL_STEP * np.maximum(1.0, np.abs(t))


# --------------------------------------------------------------------------
# scalar programs


class Program:
    """A scalar function of time used to build polar fields.

    Subclasses implement ``__call__``. ``derivative`` and ``antiderivative``
    return ``None`` when no closed form exists.
    """

    analytic = True

    def __call__(self, t):
        raise NotImplementedError

    def derivative(self, t):
        return None

    def antiderivative(self, t):
        """Integral from 0 to ``t``, or ``None`` without a closed form."""
        return None

    def is_constant(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("program parameters must be finite")


@dataclass(frozen=True)
class Const(Program):
    value: float

    def __post_init__(self):
        _check_finite(self.value)

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value)) if np.ndim(t) else float(self.value)

    def derivative(self, t):
        return np.zeros(np.shape(t)) if np.ndim(t) else 0.0

    def antiderivative(self, t):
        return self.value * np.asarray(t, dtype=float)

    def is_constant(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": "const", "value": self.value}


@dataclass(frozen=True)
class Linear(Program):
    v0: float
    slope: float

    def __post_init__(self):
        _check_finite(self.v0, self.slope)

    def __call__(self, t):
        return self.v0 + self.slope * np.asarray(t, dtype=float)

    def derivative(self, t):
        return self.slope + 0.0 * np.asarray(t, dtype=float)

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        return self.v0 * t + 0.5 * self.slope * t * t

    def is_constant(self) -> bool:
        return self.slope == 0.0

    def to_dict(self) -> dict:
        return {"kind": "linear", "v0": self.v0, "slope": self.slope}


@dataclass(frozen=True)
class Sinusoid(Program):
    """``amp * sin(freq * t + phase) + offset`` with ``freq`` an angular frequency."""

    amp: float
    freq: float
    phase: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        _check_finite(self.amp, self.freq, self.phase, self.offset)

    def __call__(self, t):
        return self.amp * np.sin(self.freq * np.asarray(t, dtype=float) + self.phase) + self.offset

    def derivative(self, t):
        return self.amp * self.freq * np.cos(self.freq * np.asarray(t, dtype=float) + self.phase)

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.freq == 0.0:
            return (self.amp * math.sin(self.phase) + self.offset) * t
        return (
            self.amp / self.freq * (math.cos(self.phase) - np.cos(self.freq * t + self.phase))
            + self.offset * t
        )

    def is_constant(self) -> bool:
        return self.amp == 0.0 or self.freq == 0.0

    def to_dict(self) -> dict:
        return {"kind": "sinusoid", "amp": self.amp, "freq": self.freq, "phase": self.phase, "offset": self.offset}


@dataclass(frozen=True, eq=False)
class Table(Program):
    """Piecewise-linear interpolation of samples ``(t_k, v_k)``."""

    t: np.ndarray
    v: np.ndarray
    analytic = False

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise InvalidArgumentError("table needs matching 1-d arrays with at least two samples")
        _check_finite(t, v)
        if np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("table time stamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    def _check_range(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0]) or np.any(t > self.t[-1]):
            raise RangeError(f"time outside table range [{self.t[0]}, {self.t[-1]}]")
        return t

    def __call__(self, t):
        t = self._check_range(t)
        out = np.interp(t, self.t, self.v)
        return out if np.ndim(out) else float(out)

    def to_dict(self) -> dict:
        return {"kind": "table", "t": self.t.tolist(), "v": self.v.tolist()}


def as_program(value) -> Program:
    """Coerce a number or a program-description dict into a :class:`Program`."""
    if isinstance(value, Program):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Const(float(value))
    if isinstance(value, dict):
        kind = value.get("kind")
        try:
            if kind == "const":
                return Const(float(value["value"]))
            if kind == "linear":
                return Linear(float(value["v0"]), float(value["slope"]))
            if kind == "sinusoid":
                return Sinusoid(
                    float(value["amp"]),
                    float(value["freq"]),
                    float(value.get("phase", 0.0)),
                    float(value.get("offset", 0.0)),
                )
            if kind == "table":
                return Table(value["t"], value["v"])
        except KeyError as exc:
            raise InvalidArgumentError(f"program {kind!r} is missing key {exc}") from exc
        raise InvalidArgumentError(f"unknown program kind {kind!r}")
    raise InvalidArgumentError(f"cannot interpret {value!r} as a program")


def _program_derivative(p: Program, t):
    d = p.derivative(t)
    if d is not None:
        return d
    t = np.asarray(t, dtype=float)
    h = _fd_step(t)
    if isinstance(p, Table):
        lo = np.maximum(t - h, p.t[0])
        hi = np.minimum(t + h, p.t[-1])
        return (p(hi) - p(lo)) / (hi - lo)
    return (p(t + h) - p(t - h)) / (2 * h)


# --------------------------------------------------------------------------
# field models


class FieldSpec:
    """Base class of magnetic field models."""

    def cartesian(self, t) -> np.ndarray:
        """Field components, shape ``(..., 3)`` for times of shape ``(...)``."""
        raise NotImplementedError

    def time_range(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantField(FieldSpec):
    Bx: float
    By: float
    Bz: float

    def __post_init__(self):
        _check_finite(self.Bx, self.By, self.Bz)

    def cartesian(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.array([self.Bx, self.By, self.Bz], dtype=float), t.shape + (3,)).copy()

    def to_dict(self) -> dict:
        return {"kind": "constant", "B": [self.Bx, self.By, self.Bz]}


@dataclass(frozen=True)
class RotatingField(FieldSpec):
    """Field of constant modulus ``B`` at polar angle ``theta`` precessing about z at rate ``omega``."""

    B: float
    theta: float
    omega: float
    phi0: float = 0.0

    def __post_init__(self):
        _check_finite(self.B, self.theta, self.omega, self.phi0)
        if self.B < 0:
            raise InvalidArgumentError("rotating field needs B >= 0")
        if not 0.0 <= self.theta <= math.pi:
            raise InvalidArgumentError("rotating field needs theta in [0, pi]")

    def phi(self, t):
        return self.omega * np.asarray(t, dtype=float) + self.phi0

    def cartesian(self, t):
        phi = self.phi(t)
        st = math.sin(self.theta)
        return self.B * np.stack(
            np.broadcast_arrays(st * np.cos(phi), st * np.sin(phi), math.cos(self.theta)), axis=-1
        )

    def to_dict(self) -> dict:
        return {"kind": "rotating", "B": self.B, "theta": self.theta, "omega": self.omega, "phi0": self.phi0}


@dataclass(frozen=True)
class PolarField(FieldSpec):
    """Field given by programs for modulus, polar angle and azimuth."""

    B: Program
    theta: Program
    phi: Program

    def __post_init__(self):
        for name in ("B", "theta", "phi"):
            object.__setattr__(self, name, as_program(getattr(self, name)))

    def cartesian(self, t):
        t = np.asarray(t, dtype=float)
        B, th, ph = self.B(t), self.theta(t), self.phi(t)
        st = np.sin(th)
        return np.stack(np.broadcast_arrays(B * st * np.cos(ph), B * st * np.sin(ph), B * np.cos(th)), axis=-1)

    def time_range(self):
        lo, hi = -math.inf, math.inf
        for p in (self.B, self.theta, self.phi):
            if isinstance(p, Table):
                lo, hi = max(lo, p.t[0]), min(hi, p.t[-1])
        return lo, hi

    def to_dict(self) -> dict:
        return {"kind": "polar", "B": self.B.to_dict(), "theta": self.theta.to_dict(), "phi": self.phi.to_dict()}


@dataclass(frozen=True, eq=False)
class CartesianTable(FieldSpec):
    """Tabulated Cartesian samples, linearly interpolated in time."""

    t: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.samples, dtype=float)
        if t.ndim != 1 or s.shape != (t.size, 3) or t.size < 2:
            raise InvalidArgumentError("table needs times (n,) and samples (n, 3) with n >= 2")
        _check_finite(t, s)
        if np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("table time stamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "samples", s)

    def time_range(self):
        return float(self.t[0]), float(self.t[-1])

    def cartesian(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0]) or np.any(t > self.t[-1]):
            raise RangeError(f"time outside table range [{self.t[0]}, {self.t[-1]}]")
        return np.stack([np.interp(t, self.t, self.samples[:, k]) for k in range(3)], axis=-1)

    def to_dict(self) -> dict:
        return {"kind": "table", "t": self.t.tolist(), "B": self.samples.tolist()}


def eval_cartesian(f: FieldSpec, t) -> np.ndarray:
    """``(Bx, By, Bz)`` at ``t``; shape ``(3,)`` for scalar ``t``, else ``t.shape + (3,)``."""
    out = f.cartesian(t)
    if not np.all(np.isfinite(out)):
        raise InvalidArgumentError("field evaluated to non-finite values")
    return out


# --------------------------------------------------------------------------
# polar decomposition


@dataclass(frozen=True, eq=False)
class PolarTrack:
    """Polar samples of a field on a time grid.

    ``degenerate`` flags samples where ``|B sin(theta)|`` is below
    ``1e-12 * max|B|``; there the azimuth carries no information.
    """

    times: np.ndarray
    B: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    degenerate: np.ndarray = field(repr=False)

    def __len__(self):
        return self.times.size

    @property
    def all_degenerate(self) -> bool:
        return bool(np.all(self.degenerate))

    def cartesian(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.stack([self.B * st * np.cos(self.phi), self.B * st * np.sin(self.phi), self.B * np.cos(self.theta)], axis=-1)


@dataclass(frozen=True)
class _PolarFunctions:
    """Callables ``B, theta, phi, phi_dot`` describing a field in polar form."""

    B: object
    theta: object
    phi: object
    phi_dot: object
    exact: bool


def _unwrap_near(angle, reference):
    """Shift ``angle`` by multiples of 2*pi to land within pi of ``reference``."""
    return angle + 2 * np.pi * np.round((reference - angle) / (2 * np.pi))


def _cartesian_polar(B_xyz):
    B = np.linalg.norm(B_xyz, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.where(B > 0, np.arccos(np.clip(B_xyz[..., 2] / np.where(B > 0, B, 1.0), -1.0, 1.0)), 0.0)
    phi = np.arctan2(B_xyz[..., 1], B_xyz[..., 0])
    return B, theta, phi


def polar_functions(f: FieldSpec, reference_times=None) -> _PolarFunctions:
    """Polar description of a field as callables of time.

    Rotating and polar fields are described exactly. Constant fields use their
    fixed direction. Tables unwrap the azimuth at their knots and place
    interpolated values on the branch nearest to the interpolated knot phase.
    """
    if isinstance(f, RotatingField):
        return _PolarFunctions(
            B=lambda t: f.B + 0.0 * np.asarray(t, dtype=float),
            theta=lambda t: f.theta + 0.0 * np.asarray(t, dtype=float),
            phi=f.phi,
            phi_dot=lambda t: f.omega + 0.0 * np.asarray(t, dtype=float),
            exact=True,
        )
    if isinstance(f, PolarField):
        return _PolarFunctions(
            B=lambda t: f.B(np.asarray(t, dtype=float)) + 0.0 * np.asarray(t, dtype=float),
            theta=lambda t: f.theta(np.asarray(t, dtype=float)) + 0.0 * np.asarray(t, dtype=float),
            phi=lambda t: f.phi(np.asarray(t, dtype=float)) + 0.0 * np.asarray(t, dtype=float),
            phi_dot=lambda t: _program_derivative(f.phi, t),
            exact=f.phi.analytic,
        )
    if isinstance(f, ConstantField):
        B, theta, phi = _cartesian_polar(np.array([f.Bx, f.By, f.Bz], dtype=float))
        z = lambda t: 0.0 * np.asarray(t, dtype=float)  # noqa: E731
        return _PolarFunctions(
            B=lambda t: float(B) + z(t),
            theta=lambda t: float(theta) + z(t),
            phi=lambda t: float(phi) + z(t),
            phi_dot=z,
            exact=True,
        )
    if isinstance(f, CartesianTable):
        knots_B, _, knots_phi = _cartesian_polar(f.samples)
        knots_phi = np.unwrap(knots_phi)

        def phi(t):
            t = np.asarray(t, dtype=float)
            _, _, raw = _cartesian_polar(eval_cartesian(f, t))
            return _unwrap_near(raw, np.interp(t, f.t, knots_phi))

        def theta(t):
            return _cartesian_polar(eval_cartesian(f, t))[1]

        def B(t):
            return _cartesian_polar(eval_cartesian(f, t))[0]

        def phidot(t):
            t = np.asarray(t, dtype=float)
            h = _fd_step(t)
            lo = np.maximum(t - h, f.t[0])
            hi = np.minimum(t + h, f.t[-1])
            dphi = phi(hi) - phi(lo)
            dphi = dphi - 2 * np.pi * np.round(dphi / (2 * np.pi))
            return dphi / (hi - lo)

        return _PolarFunctions(B=B, theta=theta, phi=phi, phi_dot=phidot, exact=False)
    raise InvalidArgumentError(f"unsupported field type {type(f).__name__}")


def to_polar_track(f: FieldSpec, grid) -> PolarTrack:
    """Sample ``B, theta, phi, phi_dot`` on ``grid``.

    For Cartesian-specified fields the azimuth is ``atan2(By, Bx)`` unwrapped
    along the grid; at degenerate samples the previous azimuth is carried
    forward. Rotating and polar fields are sampled from their closed forms.

    Raises
    ------
    DegenerateFieldError
        If the field vanishes on the whole grid.
    """
    times = np.asarray(grid, dtype=float)
    B_xyz = eval_cartesian(f, times)
    modulus = np.linalg.norm(B_xyz, axis=-1)
    scale = float(np.max(modulus, initial=0.0))
    if scale == 0.0:
        raise DegenerateFieldError("field vanishes identically on the grid")
    degenerate = np.hypot(B_xyz[..., 0], B_xyz[..., 1]) <= DEGENERATE_REL * scale

    if isinstance(f, (RotatingField, PolarField)):
        pf = polar_functions(f)
        return PolarTrack(times, pf.B(times), pf.theta(times), pf.phi(times), pf.phi_dot(times), degenerate)

    B, theta, raw_phi = _cartesian_polar(B_xyz)
    phi = np.empty_like(raw_phi)
    last = None
    for i, (p, deg) in enumerate(zip(raw_phi, degenerate)):
        if deg:
            phi[i] = last if last is not None else np.nan
            continue
        phi[i] = p if last is None else _unwrap_near(p, last)
        last = phi[i]
    if last is None:
        phi[:] = 0.0
    else:
        # leading degenerate samples take the first defined azimuth
        first = phi[np.argmax(~degenerate)]
        phi = np.where(np.isnan(phi), first, phi)

    if isinstance(f, ConstantField):
        pdot = np.zeros_like(times)
    else:
        pdot = polar_functions(f).phi_dot(times)
        pdot = np.where(degenerate, 0.0, pdot)
    return PolarTrack(times, B, theta, phi, pdot, degenerate)


def phi_dot(f: FieldSpec, t, method: str = "auto"):
    """Azimuthal angular velocity at ``t``.

    ``method`` is ``"auto"`` (analytic where a closed form exists),
    ``"analytic"`` or ``"fd"`` (central difference, step ``1e-6 max(1, |t|)``).

    Raises
    ------
    DegenerateFieldError
        If the transverse field vanishes at ``t``.
    """
    t_arr = np.asarray(t, dtype=float)
    B_xyz = eval_cartesian(f, t_arr)
    transverse = np.hypot(B_xyz[..., 0], B_xyz[..., 1])
    scale = max(float(np.max(np.linalg.norm(B_xyz, axis=-1), initial=0.0)), 0.0)
    if scale == 0.0 or np.any(transverse <= DEGENERATE_REL * scale):
        raise DegenerateFieldError("azimuth undefined: transverse field vanishes")

    if method not in ("auto", "analytic", "fd"):
        raise InvalidArgumentError(f"unknown method {method!r}")
    pf = polar_functions(f)
    if method == "fd":
        h = _fd_step(t_arr)
        lo, hi = t_arr - h, t_arr + h
        tr = f.time_range()
        lo, hi = np.maximum(lo, tr[0]), np.minimum(hi, tr[1])
        d = pf.phi(hi) - pf.phi(lo)
        if not isinstance(f, PolarField):
            d = d - 2 * np.pi * np.round(d / (2 * np.pi))
        out = d / (hi - lo)
    else:
        if method == "analytic" and not pf.exact:
            raise InvalidArgumentError("no analytic azimuth derivative for this field")
        out = pf.phi_dot(t_arr)
    return out if np.ndim(out) else float(out)

