"""Run configuration: flat dotted-key files plus --key=value overrides.

The file format is one `section.key = value` assignment per line, with
`#` comments and blank lines ignored.  Every key is also overridable on
the command line as `--section.key=value`.  Initial data is described by
small constructor expressions such as

    initial.u   = gaussian(center=pi, width=0.3, amplitude=0.1)
    initial.rho = constant(1.0)

Numeric arguments accept arithmetic on literals and `pi` (for example
`3*pi/2`).  Unknown keys, malformed lines and bad values raise
ConfigError with the offending location.
"""

import ast
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ModelParams,
    constant_field,
    cosine_mode,
    gaussian_bump,
    sine_mode,
)
from .spectral import Field, SpectralGrid
from .timestepper import StepControl


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "params.a": "2.0",
    "params.alpha": "0.0",
    "params.kappa": "1.0",
    "params.branch": "right",
    "grid.n": "256",
    "initial.u": "cosine(mode=1, amplitude=0.05)",
    "initial.rho": "constant(1.0)",
    "run.T": "1.0",
    "run.formulation": "eulerian",
    "run.stepper": "rk4",
    "run.driver": "u_form",
    "run.snapshot_every": "0.1",
    "run.track_flowmap": "false",
    "run.output_dir": "out",
    "run.seed": "0",
    "control.dt": "1e-3",
    "control.abs_tol": "1e-8",
    "control.rel_tol": "1e-8",
    "control.dt_min": "1e-12",
    "control.max_ux": "1e6",
    "compare.threshold": "1e-6",
}

_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)\s*=\s*(.*)$")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse assignments into a flat {key: raw string} mapping."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if match is None:
            raise ConfigError(f"{source}:{lineno}: cannot parse {raw.strip()!r}")
        key, value = match.group(1), match.group(2).strip()
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def apply_overrides(mapping: dict, overrides) -> dict:
    """Fold `key=value` strings (already stripped of --) into the mapping."""
    merged = dict(mapping)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"override names unknown key {key!r}")
        merged[key] = value.strip()
    return merged


@dataclass
class RunConfig:
    """Typed view of a full flat configuration."""

    params: ModelParams
    branch: str
    grid_n: int
    initial_u: str
    initial_rho: str
    T: float
    formulation: str
    stepper: str
    driver: str
    snapshot_every: float
    track_flowmap: bool
    output_dir: str
    seed: int
    control: StepControl
    compare_threshold: float
    raw: dict = field(default_factory=dict)


def _to_float(key, text):
    try:
        return safe_number(text)
    except ConfigError:
        raise ConfigError(f"key {key!r}: cannot read number from {text!r}")


def _to_int(key, text):
    value = _to_float(key, text)
    if value != int(value):
        raise ConfigError(f"key {key!r}: expected an integer, got {text!r}")
    return int(value)


def _to_bool(key, text):
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {text!r}")


def build_config(mapping: dict) -> RunConfig:
    """Typed configuration from a flat mapping (defaults filled in)."""
    flat = dict(DEFAULTS)
    flat.update(mapping)
    try:
        params = ModelParams(
            a=_to_float("params.a", flat["params.a"]),
            alpha=_to_float("params.alpha", flat["params.alpha"]),
            kappa=_to_float("params.kappa", flat["params.kappa"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    branch = flat["params.branch"]
    if branch not in ("right", "left"):
        raise ConfigError(f"key 'params.branch': expected right or left, got {branch!r}")
    formulation = flat["run.formulation"]
    if formulation not in ("eulerian", "lagrangian"):
        raise ConfigError(
            f"key 'run.formulation': expected eulerian or lagrangian, got {formulation!r}"
        )
    stepper = flat["run.stepper"]
    if stepper not in ("rk4", "adaptive"):
        raise ConfigError(f"key 'run.stepper': expected rk4 or adaptive, got {stepper!r}")
    driver = flat["run.driver"]
    if driver not in ("u_form", "m_form"):
        raise ConfigError(f"key 'run.driver': expected u_form or m_form, got {driver!r}")
    try:
        control = StepControl(
            dt=_to_float("control.dt", flat["control.dt"]),
            abs_tol=_to_float("control.abs_tol", flat["control.abs_tol"]),
            rel_tol=_to_float("control.rel_tol", flat["control.rel_tol"]),
            dt_min=_to_float("control.dt_min", flat["control.dt_min"]),
            max_ux=_to_float("control.max_ux", flat["control.max_ux"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    grid_n = _to_int("grid.n", flat["grid.n"])
    if grid_n < 8 or grid_n % 2 != 0:
        raise ConfigError(f"key 'grid.n': expected an even size >= 8, got {grid_n}")
    return RunConfig(
        params=params,
        branch=branch,
        grid_n=grid_n,
        initial_u=flat["initial.u"],
        initial_rho=flat["initial.rho"],
        T=_to_float("run.T", flat["run.T"]),
        formulation=formulation,
        stepper=stepper,
        driver=driver,
        snapshot_every=_to_float("run.snapshot_every", flat["run.snapshot_every"]),
        track_flowmap=_to_bool("run.track_flowmap", flat["run.track_flowmap"]),
        output_dir=flat["run.output_dir"],
        seed=_to_int("run.seed", flat["run.seed"]),
        control=control,
        compare_threshold=_to_float("compare.threshold", flat["compare.threshold"]),
        raw=flat,
    )


def load_config(path=None, overrides=()) -> RunConfig:
    mapping = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            mapping = parse_config_text(handle.read(), source=str(path))
    return build_config(apply_overrides(mapping, overrides))


def config_echo(cfg: RunConfig) -> dict:
    """The flat mapping that rebuilds this configuration exactly."""
    return dict(cfg.raw)


# ---------------------------------------------------------------------------
# numeric literals and initial-data descriptors

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def safe_number(text: str) -> float:
    """Evaluate arithmetic over numeric literals and `pi`; nothing else."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise ConfigError(f"cannot parse number {text!r}")

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            value = walk(node.operand)
            return -value if isinstance(node.op, ast.USub) else value
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
            return left**right
        raise ConfigError(f"disallowed expression in number {text!r}")

    return walk(tree)


_DESCRIPTOR = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$", re.DOTALL)

_KINDS = {
    "zero": ((), ()),
    "constant": (("value",), ("value",)),
    "cosine": (("mode", "amplitude"), ("mode",)),
    "sine": (("mode", "amplitude"), ("mode",)),
    "gaussian": (("center", "width", "amplitude"), ("center", "width")),
    "samples": (("path",), ("path",)),
}


def parse_descriptor(text: str):
    """Split `name(arg=value, ...)` into (name, {arg: raw string})."""
    match = _DESCRIPTOR.match(text)
    if match is None:
        raise ConfigError(f"cannot parse initial-data descriptor {text!r}")
    name, body = match.group(1), match.group(2)
    if name not in _KINDS:
        raise ConfigError(
            f"unknown initial-data kind {name!r}; known: {sorted(_KINDS)}"
        )
    order, required = _KINDS[name]
    args = {}
    if body and body.strip():
        for position, piece in enumerate(body.split(",")):
            piece = piece.strip()
            if "=" in piece:
                key, value = piece.split("=", 1)
                key = key.strip()
            else:
                if position >= len(order):
                    raise ConfigError(f"too many arguments in {text!r}")
                key, value = order[position], piece
            if key not in order:
                raise ConfigError(f"unknown argument {key!r} in {text!r}")
            args[key] = value.strip()
    missing = [key for key in required if key not in args]
    if missing:
        raise ConfigError(f"descriptor {text!r} is missing {missing}")
    return name, args


def build_initial_field(descriptor: str, grid: SpectralGrid) -> Field:
    """Realize an initial-data descriptor on the grid."""
    name, args = parse_descriptor(descriptor)
    try:
        if name == "zero":
            return constant_field(grid, 0.0)
        if name == "constant":
            return constant_field(grid, safe_number(args["value"]))
        if name == "cosine":
            return cosine_mode(
                grid,
                int(safe_number(args["mode"])),
                safe_number(args.get("amplitude", "1.0")),
            )
        if name == "sine":
            return sine_mode(
                grid,
                int(safe_number(args["mode"])),
                safe_number(args.get("amplitude", "1.0")),
            )
        if name == "gaussian":
            return gaussian_bump(
                grid,
                center=safe_number(args["center"]),
                width=safe_number(args["width"]),
                amplitude=safe_number(args.get("amplitude", "1.0")),
            )
        samples = np.loadtxt(args["path"], dtype=float)
        if samples.ndim != 1 or samples.size != grid.n:
            raise ConfigError(
                f"sample file {args['path']!r} must hold exactly {grid.n} values"
            )
        return Field(grid, samples)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(f"descriptor {descriptor!r}: {exc}")
