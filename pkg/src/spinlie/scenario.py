"""Scenario files: JSON descriptions of a field, a grid and what to compute.

A scenario is a JSON object::

    {
      "name": "rabi",
      "spin": "1/2",                       # two_j integer, "j" string, or a list (sweep)
      "field": {"kind": "rotating", "B": 1, "theta": 1.0471975511965976, "omega": 0.5},
      "grid": {"t0": 0, "t1": 10, "steps": 10000},
      "gamma": "auto",                     # or a number
      "tolerances": {"residual": null, "fidelity": 1e-6},
      "initial_state": [1, 0],             # entries are numbers or [re, im] pairs
      "outputs": ["report", "result", "csv"]
    }

``"preset": "rotating-example"`` fills in the rotating field with ``B = 1``,
``theta = pi/3``, ``omega = 0.5``, ``phi0 = 0`` on ``[0, 10]`` with 10000
steps and spin 1/2; explicit keys override the preset. A file holding
``{"scenarios": [...]}`` is a batch.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .exceptions import InvalidArgumentError
from .fields import CartesianTable, ConstantField, FieldSpec, PolarField, RotatingField, time_grid
from .spinrep import SpinQuantumNumber

__all__ = [
    "PRESETS",
    "OUTPUTS",
    "Scenario",
    "field_from_dict",
    "parse_scenario",
    "load_scenarios",
]

PRESETS = {
    "rotating-example": {
        "name": "rotating-example",
        "spin": "1/2",
        "field": {"kind": "rotating", "B": 1.0, "theta": math.pi / 3, "omega": 0.5, "phi0": 0.0},
        "grid": {"t0": 0.0, "t1": 10.0, "steps": 10000},
    }
}

OUTPUTS = ("report", "result", "csv")
DEFAULT_FIDELITY = 1e-6
_KEYS = {"name", "preset", "spin", "field", "grid", "gamma", "tolerances", "initial_state", "outputs", "target", "g0"}


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    spins: tuple
    field: FieldSpec
    t0: float
    t1: float
    steps: int
    gamma: Union[str, float] = "auto"
    residual_tol: Optional[float] = None
    fidelity_tol: float = DEFAULT_FIDELITY
    initial_state: Optional[np.ndarray] = None
    outputs: tuple = OUTPUTS
    target: Optional[dict] = None
    g0: Optional[np.ndarray] = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> np.ndarray:
        return time_grid(self.t0, self.t1, self.steps)

    def initial_for(self, spin: SpinQuantumNumber) -> np.ndarray:
        if self.initial_state is None:
            psi = np.zeros(spin.dim, dtype=complex)
            psi[0] = 1.0
            return psi
        if self.initial_state.size != spin.dim:
            raise InvalidArgumentError(
                f"initial_state has {self.initial_state.size} components but spin {spin} needs {spin.dim}"
            )
        return self.initial_state

    def wants(self, artifact: str) -> bool:
        return artifact in self.outputs


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidArgumentError(f"{what} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{what} must be finite")
    return float(value)


def field_from_dict(d) -> FieldSpec:
    """Build a :class:`FieldSpec` from its tagged-union description."""
    if not isinstance(d, dict) or "kind" not in d:
        raise InvalidArgumentError("field must be an object with a 'kind' key")
    kind = d["kind"]
    try:
        if kind == "constant":
            B = d["B"]
            if not isinstance(B, list) or len(B) != 3:
                raise InvalidArgumentError("constant field needs B = [Bx, By, Bz]")
            return ConstantField(*(_number(b, "B component") for b in B))
        if kind == "rotating":
            return RotatingField(
                _number(d["B"], "B"),
                _number(d["theta"], "theta"),
                _number(d["omega"], "omega"),
                _number(d.get("phi0", 0.0), "phi0"),
            )
        if kind == "polar":
            return PolarField(d["B"], d["theta"], d["phi"])
        if kind == "table":
            return CartesianTable(d["t"], d["B"])
    except KeyError as exc:
        raise InvalidArgumentError(f"field of kind {kind!r} is missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"malformed {kind!r} field: {exc}") from exc
    raise InvalidArgumentError(f"unknown field kind {kind!r}")


def _complex_vector(entries) -> np.ndarray:
    if isinstance(entries, dict):
        re = np.asarray(entries.get("re", []), dtype=float)
        im = np.asarray(entries.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise InvalidArgumentError("initial_state re/im lengths differ")
        return re + 1j * im
    if not isinstance(entries, list) or not entries:
        raise InvalidArgumentError("initial_state must be a non-empty list")
    out = []
    for e in entries:
        if isinstance(e, list) and len(e) == 2:
            out.append(complex(_number(e[0], "Re"), _number(e[1], "Im")))
        else:
            out.append(complex(_number(e, "initial_state entry")))
    return np.array(out, dtype=complex)


def parse_scenario(data, overrides: Optional[dict] = None) -> Scenario:
    """Validate a scenario object and apply command-line overrides.

    ``overrides`` may hold ``steps``, ``gamma`` and ``tolerance`` (the latter
    is stored as both residual and fidelity override; each command uses the
    one it needs).
    """
    if not isinstance(data, dict):
        raise InvalidArgumentError("scenario must be a JSON object")
    unknown = set(data) - _KEYS
    if unknown:
        raise InvalidArgumentError(f"unknown scenario keys: {sorted(unknown)}")
    merged = {}
    if "preset" in data:
        if data["preset"] not in PRESETS:
            raise InvalidArgumentError(f"unknown preset {data['preset']!r}")
        merged.update(json.loads(json.dumps(PRESETS[data["preset"]])))
    merged.update({k: v for k, v in data.items() if k != "preset"})
    overrides = overrides or {}

    if "field" not in merged:
        raise InvalidArgumentError("scenario has no field block")
    fld = field_from_dict(merged["field"])

    spin_value = merged.get("spin", "1/2")
    spin_list = spin_value if isinstance(spin_value, list) else [spin_value]
    if not spin_list:
        raise InvalidArgumentError("spin sweep is empty")
    spins = tuple(SpinQuantumNumber.parse(s) for s in spin_list)

    if "grid" not in merged or not isinstance(merged["grid"], dict):
        raise InvalidArgumentError("scenario has no grid block {t0, t1, steps}")
    g = merged["grid"]
    try:
        t0, t1 = _number(g["t0"], "grid.t0"), _number(g["t1"], "grid.t1")
        steps = g["steps"]
    except KeyError as exc:
        raise InvalidArgumentError(f"grid is missing key {exc}") from exc
    if overrides.get("steps") is not None:
        steps = overrides["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise InvalidArgumentError("grid.steps must be an integer >= 2")
    if not t1 > t0:
        raise InvalidArgumentError("grid needs t1 > t0")
    lo, hi = fld.time_range()
    if t0 < lo or t1 > hi:
        raise InvalidArgumentError(f"grid [{t0}, {t1}] leaves the field's time range [{lo}, {hi}]")

    gamma = merged.get("gamma", "auto")
    if overrides.get("gamma") is not None:
        gamma = overrides["gamma"]
    if gamma != "auto":
        gamma = _number(gamma, "gamma")

    tols = merged.get("tolerances", {}) or {}
    if not isinstance(tols, dict):
        raise InvalidArgumentError("tolerances must be an object")
    residual = tols.get("residual")
    residual = None if residual is None else _number(residual, "tolerances.residual")
    fidelity = _number(tols.get("fidelity", DEFAULT_FIDELITY), "tolerances.fidelity")
    if overrides.get("tolerance") is not None:
        residual = fidelity = float(overrides["tolerance"])
    for name, v in (("residual", residual), ("fidelity", fidelity)):
        if v is not None and v <= 0:
            raise InvalidArgumentError(f"tolerances.{name} must be positive")

    psi = None
    if merged.get("initial_state") is not None:
        psi = _complex_vector(merged["initial_state"])
        if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
            raise InvalidArgumentError("initial_state must have norm 1 within 1e-9")
        if len(spins) > 1:
            raise InvalidArgumentError("initial_state cannot be combined with a spin sweep")
        if psi.size != spins[0].dim:
            raise InvalidArgumentError(f"initial_state has {psi.size} components; spin {spins[0]} needs {spins[0].dim}")

    outputs = merged.get("outputs", list(OUTPUTS))
    if not isinstance(outputs, list) or any(o not in OUTPUTS for o in outputs):
        raise InvalidArgumentError(f"outputs must be a list drawn from {list(OUTPUTS)}")

    target = merged.get("target")
    if target is not None and not isinstance(target, dict):
        raise InvalidArgumentError("target must be an object")
    g0 = merged.get("g0")
    if g0 is not None:
        g0 = np.asarray([_number(v, "g0 entry") for v in g0], dtype=float)
        if g0.shape != (4,):
            raise InvalidArgumentError("g0 must list the four coordinates x1, x2, y1, y2")

    name = str(merged.get("name", "scenario"))
    if not name or any(c in name for c in "/\\") or name.startswith("."):
        raise InvalidArgumentError(f"scenario name {name!r} is not usable as a file stem")
    return Scenario(name, spins, fld, t0, t1, steps, gamma, residual, fidelity, psi, tuple(outputs), target, g0, data)


def load_scenarios(path, overrides: Optional[dict] = None) -> list:
    """Read a scenario or batch file; returns a list of :class:`Scenario`."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(data, dict) and "scenarios" in data:
        items = data["scenarios"]
        if not isinstance(items, list) or not items:
            raise InvalidArgumentError("batch file needs a non-empty 'scenarios' list")
        out = [parse_scenario(item, overrides) for item in items]
        names = [s.name for s in out]
        if len(set(names)) != len(names):
            raise InvalidArgumentError("scenario names in a batch must be unique")
        return out
    return [parse_scenario(data, overrides)]
