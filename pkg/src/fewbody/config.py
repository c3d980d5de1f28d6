"""Run configurations: one JSON document per run.

Structure is checked against :data:`SCHEMA`; defaults are then filled in
and the physical parameters are built once so that inconsistencies surface
before any solve.  :func:`emit_config` writes the canonical (fully
defaulted) form, which parses back to an equal :class:`RunSpec`.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from .errors import ValidationError
from .expr import ExprSyntaxError, parse_potential_expr
from .gem2b import NumParams2B, PhysParams2B
from .gem3b1d import NumParams3B1D, PhysParams3B1D
from .isgl3d import NumParams3B3D, ObservRequest, PhysParams3B3D
from .potentials import ContactPotential1D, GaussianPotential, as_potential, load_tabulated

__all__ = ["ConfigError", "RunSpec", "SCHEMA", "parse_config", "emit_config", "build_potential", "build_params"]

PROBLEMS = ("two_body", "three_body_1d", "three_body_3d")

_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 2}
_nonneg_int = {"type": "integer", "minimum": 0}

_potential = {
    "oneOf": [
        {"type": "string", "minLength": 1},
        {
            "type": "object",
            "properties": {"type": {"const": "expr"}, "expr": {"type": "string"}},
            "required": ["type", "expr"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"type": {"const": "gaussian"}, "v0": _number, "mu_g": _pos},
            "required": ["type", "v0", "mu_g"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"type": {"const": "contact"}, "g": _number, "x0": _number},
            "required": ["type", "g"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "table"},
                "path": {"type": "string"},
                "rule": {"enum": ["cubic", "linear"]},
            },
            "required": ["type", "path"],
            "additionalProperties": False,
        },
    ]
}

_three_vints = {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "array", "items": _potential}}

SCHEMA = {
    "type": "object",
    "required": ["problem", "phys"],
    "additionalProperties": False,
    "properties": {
        "problem": {"enum": list(PROBLEMS)},
        "phys": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mur": _pos,
                "dim": {"enum": [1, 2, 3]},
                "lmin": _nonneg_int,
                "lmax": _nonneg_int,
                "vints": {"type": "array"},
                "masses": {"type": "array", "items": _pos, "minItems": 3, "maxItems": 3},
                "svals": {"type": "array", "items": {"type": "string"}, "minItems": 3, "maxItems": 3},
                "parity": {"enum": [-1, 0, 1]},
            },
            "required": ["vints"],
        },
        "num": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "nmax": _count,
                "r1": _pos,
                "rnmax": _pos,
                "Nmax": _count,
                "R1": _pos,
                "RNmax": _pos,
                "lmin": _nonneg_int,
                "lmax": _nonneg_int,
                "Lmin": _nonneg_int,
                "Lmax": _nonneg_int,
                "omega_cr": {"type": "number", "minimum": 0},
                "theta_csm": {"type": "number", "minimum": 0, "exclusiveMaximum": 45},
                "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "kmax_interpol": {"type": "integer", "minimum": 4},
            },
        },
        "flags": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "wf": {"type": "boolean"},
                "cr": {"type": "boolean"},
                "csm": {
                    "oneOf": [
                        {"type": "boolean"},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {"delta_arg": _number, "emax": {"type": ["number", "null"]}},
                        },
                    ]
                },
                "optimize": {
                    "type": ["object", "null"],
                    "additionalProperties": False,
                    "properties": {"stateindex": {"type": "integer", "minimum": 1}},
                    "required": ["stateindex"],
                },
                "invert": {
                    "type": ["object", "null"],
                    "additionalProperties": False,
                    "properties": {
                        "stateindex": {"type": "integer", "minimum": 1},
                        "target_E": {"type": "number", "exclusiveMaximum": 0},
                        "optimize_ranges": {"type": "boolean"},
                    },
                    "required": ["stateindex", "target_E"],
                },
            },
        },
        "observ": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "properties": {
                "stateindices": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "centobs": {
                    "type": "array",
                    "minItems": 3,
                    "maxItems": 3,
                    "items": {"type": "array", "items": {"type": "string"}},
                },
                "R2": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "boolean"}},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"rmax": {"type": ["number", "null"], "exclusiveMinimum": 0}, "npts": _count, "nstates": {"type": "integer", "minimum": 1}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["json", "csv"]},
                "path": {"type": ["string", "null"]},
                "nstates": {"type": ["integer", "null"], "minimum": 1},
            },
        },
    },
}

_NUM_DEFAULTS = {
    "two_body": dict(nmax=10, r1=0.1, rnmax=30.0, omega_cr=1.5, theta_csm=0.0, threshold=1e-10),
    "three_body_1d": dict(
        nmax=10, r1=0.1, rnmax=25.0, Nmax=10, R1=0.1, RNmax=25.0,
        lmin=0, lmax=0, Lmin=0, Lmax=0, theta_csm=0.0, threshold=1e-10, kmax_interpol=1000,
    ),
    "three_body_3d": dict(
        nmax=10, r1=0.1, rnmax=25.0, Nmax=10, R1=0.1, RNmax=25.0, theta_csm=0.0, threshold=1e-10, kmax_interpol=1000
    ),
}
_PHYS_KEYS = {
    "two_body": {"mur", "dim", "lmin", "lmax", "vints"},
    "three_body_1d": {"masses", "svals", "vints", "parity"},
    "three_body_3d": {"masses", "svals", "vints"},
}


class ConfigError(ValidationError):
    """Schema or consistency violation; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<root>'}: {message}")


@dataclass
class RunSpec:
    problem: str
    phys: dict
    num: dict
    flags: dict = field(default_factory=dict)
    observ: dict | None = None
    grid: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def _located(exc: ValidationError, path: str) -> ValidationError:
    """Prefix ``exc`` with a field path, keeping specific error types."""
    if type(exc) is ValidationError or isinstance(exc, (ConfigError, ExprSyntaxError)):
        return ConfigError(path, str(exc))
    err = type(exc)(f"{path}: {exc}")
    err.path = path
    return err


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _canonical_potential(p):
    if isinstance(p, str):
        return {"type": "expr", "expr": p}
    p = dict(p)
    if p["type"] == "contact":
        p.setdefault("x0", 0.0)
    if p["type"] == "table":
        p.setdefault("rule", "cubic")
    return p


def build_potential(p: dict, base_dir: Path | None = None):
    kind = p["type"]
    if kind == "expr":
        return as_potential(p["expr"])
    if kind == "gaussian":
        return GaussianPotential(float(p["v0"]), float(p["mu_g"]))
    if kind == "contact":
        return ContactPotential1D(float(p["g"]), float(p.get("x0", 0.0)))
    path = Path(p["path"])
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return load_tabulated(path, p.get("rule", "cubic"))


def _pot_list(items, where, base_dir):
    out = []
    for k, p in enumerate(items):
        try:
            out.append(build_potential(p, base_dir))
        except ValidationError as exc:
            raise _located(exc, f"{where}[{k}]") from exc
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{where}[{k}]", str(exc)) from exc
    return out


def build_params(spec: RunSpec, base_dir: Path | None = None):
    """Solver parameter objects ``(phys, num)`` for ``spec``."""
    ph, nu = spec.phys, spec.num
    num_cls, phys_cls = {
        "two_body": (NumParams2B, PhysParams2B),
        "three_body_1d": (NumParams3B1D, PhysParams3B1D),
        "three_body_3d": (NumParams3B3D, PhysParams3B3D),
    }[spec.problem]
    try:
        num = num_cls(**nu)
    except ValidationError as exc:
        raise _located(exc, "num") from exc
    try:
        if spec.problem == "two_body":
            vints = _pot_list(ph["vints"], "phys.vints", base_dir)
            phys = phys_cls(ph["mur"], vints, ph["dim"], ph["lmin"], ph["lmax"])
        else:
            vints = [_pot_list(pair, f"phys.vints[{m}]", base_dir) for m, pair in enumerate(ph["vints"])]
            phys = phys_cls(ph["masses"], ph["svals"], vints, ph.get("parity", 0))
    except ConfigError:
        raise
    except ValidationError as exc:
        if hasattr(exc, "path"):
            raise
        raise _located(exc, "phys") from exc
    return phys, num


def build_observ(spec: RunSpec) -> ObservRequest | None:
    ob = spec.observ
    if ob is None:
        return None
    centobs = [[as_potential(o) for o in obs] for obs in ob["centobs"]]
    return ObservRequest(ob["stateindices"], centobs, ob["R2"])


def _check_flags(problem: str, flags: dict) -> None:
    if problem != "two_body":
        for name in ("cr", "optimize", "invert"):
            if flags.get(name):
                raise ConfigError(f"flags.{name}", f"only available for two_body problems, not {problem}")


def parse_config(text: str, base_dir: str | Path | None = None) -> RunSpec:
    """Validate a JSON run configuration and fill in defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(raw))
    if error is not None:
        raise ConfigError(_path(error.absolute_path), error.message)

    problem = raw["problem"]
    phys_in = raw["phys"]
    extra = set(phys_in) - _PHYS_KEYS[problem]
    if extra:
        raise ConfigError(f"phys.{sorted(extra)[0]}", f"not a parameter of {problem} problems")
    if problem == "two_body":
        phys = dict(mur=1.0, dim=3, lmin=0, lmax=0)
        phys.update(phys_in)
    else:
        phys = dict(svals=["x", "y", "z"])
        if problem == "three_body_1d":
            phys["parity"] = 1
        phys.update(phys_in)
        if "masses" not in phys:
            raise ConfigError("phys.masses", "three masses are required")
    _validate_vints(problem, phys)
    if problem == "two_body":
        phys["vints"] = [_canonical_potential(p) for p in phys["vints"]]
    else:
        phys["vints"] = [[_canonical_potential(p) for p in pair] for pair in phys["vints"]]

    num = dict(_NUM_DEFAULTS[problem])
    extra = set(raw.get("num", {})) - set(num)
    if extra:
        raise ConfigError(f"num.{sorted(extra)[0]}", f"not a parameter of {problem} problems")
    num.update(raw.get("num", {}))
    for key in ("r1", "rnmax", "R1", "RNmax", "theta_csm", "threshold", "omega_cr"):
        if key in num:
            num[key] = float(num[key])

    flags = dict(wf=False, cr=False, csm=False, optimize=None, invert=None)
    flags.update(raw.get("flags", {}))
    if flags["csm"] is True:
        flags["csm"] = {}
    if isinstance(flags["csm"], dict):
        flags["csm"] = {"delta_arg": 5.0, "emax": None, **flags["csm"]}
    if flags["invert"] is not None:
        flags["invert"] = {"optimize_ranges": False, **flags["invert"]}
    _check_flags(problem, flags)

    observ = raw.get("observ")
    if observ is not None:
        if problem != "three_body_3d":
            raise ConfigError("observ", "observables are available for three_body_3d problems only")
        observ = {"stateindices": [1], "centobs": [[], [], []], "R2": [False, False, False], **observ}
        for m, obs in enumerate(observ["centobs"]):
            for k, o in enumerate(obs):
                try:
                    parse_potential_expr(o)
                except ValidationError as exc:
                    raise ConfigError(f"observ.centobs[{m}][{k}]", str(exc)) from exc

    grid = {"rmax": None, "npts": 2001, "nstates": 5, **raw.get("grid", {})}
    output = {"format": "json", "path": None, "nstates": None, **raw.get("output", {})}

    spec = RunSpec(problem, phys, num, flags, observ, grid, output)
    build_params(spec, Path(base_dir) if base_dir is not None else None)
    return spec


def _validate_vints(problem: str, phys: dict) -> None:
    vints = phys["vints"]
    try:
        if problem == "two_body":
            jsonschema.validate(vints, {"type": "array", "minItems": 1, "items": _potential})
        else:
            jsonschema.validate(vints, _three_vints)
    except jsonschema.ValidationError as exc:
        raise ConfigError(_path(["phys", "vints", *exc.absolute_path]), exc.message) from exc


def emit_config(spec: RunSpec) -> str:
    """Canonical JSON text of ``spec`` (all defaults explicit, sorted keys)."""
    data = asdict(spec)
    if data["observ"] is None:
        del data["observ"]
    return json.dumps(data, sort_keys=True, indent=2)
