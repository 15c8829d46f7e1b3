"""Run configuration: JSON documents validated against a bundled schema."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .operators import DIRICHLET, NEUMANN, Domain1D, Field, random_nonnegative_field
from .reactions import DiffusionParams, KineticParams, ParameterError
from .stepper import SolverConfig

__all__ = ["ConfigError", "RunSpec", "load_config", "parse_config", "config_hash", "build_profile"]


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted location of the problem."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _schema():
    text = resources.files("fracrd").joinpath("config_schema.json").read_text()
    return json.loads(text)


_VALIDATOR = None


def _validator():
    global _VALIDATOR
    if _VALIDATOR is None:
        _VALIDATOR = jsonschema.Draft7Validator(_schema())
    return _VALIDATOR


def _best_error(errors):
    # For oneOf failures report the branch whose "profile" const matched.
    err = jsonschema.exceptions.best_match(errors)
    if err.validator == "oneOf" and err.context:
        inner = [e for e in err.context if list(e.relative_path) != ["profile"]]
        if inner:
            err = jsonschema.exceptions.best_match(inner)
    return err


def validate(doc: dict):
    errors = list(_validator().iter_errors(doc))
    if errors:
        err = _best_error(errors)
        path = ".".join(str(p) for p in err.absolute_path)
        raise ConfigError(path, err.message)


@dataclass
class RunSpec:
    dom: Domain1D
    kp: KineticParams
    dp: DiffusionParams
    initial: dict
    solver: SolverConfig
    outputs: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    converge: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def initial_fields(self, seed: int = 0) -> tuple[Field, Field]:
        u = build_profile(self.dom, self.initial["u"], seed, "initial.u")
        v = build_profile(self.dom, self.initial["v"], seed + 1, "initial.v")
        return u, v


def _boundary(value) -> int:
    if value in ("dirichlet", 1):
        return DIRICHLET
    return NEUMANN


def parse_config(doc: dict) -> RunSpec:
    """Validate a configuration document and build the typed records."""
    validate(doc)
    d = doc.get("domain", {})
    dom = Domain1D(float(d.get("length", math.pi)), int(d.get("n_modes", 256)),
                   _boundary(d.get("boundary", "dirichlet")))
    try:
        kp = KineticParams(**{k: float(v) for k, v in doc["kinetics"].items()})
    except ParameterError as exc:
        raise ConfigError(f"kinetics.{exc.field}", str(exc)) from None
    try:
        dp = DiffusionParams(**{k: float(v) for k, v in doc.get("diffusion", {}).items()})
    except ParameterError as exc:
        raise ConfigError(f"diffusion.{exc.field}", str(exc)) from None
    s = dict(doc["solver"])
    try:
        solver = SolverConfig(**s)
    except ValueError as exc:
        raise ConfigError("solver", str(exc)) from None
    return RunSpec(dom, kp, dp, doc["initial"], solver, doc.get("outputs", {}), doc.get("sweep", {}),
                   doc.get("verify", {}), doc.get("converge", {}), raw=copy.deepcopy(doc))


def load_config(path) -> RunSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be an object")
    return parse_config(doc)


def config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def set_path(doc: dict, dotted: str, value) -> dict:
    """Copy of ``doc`` with the dotted key replaced."""
    out = copy.deepcopy(doc)
    node = out
    keys = dotted.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
    return out


def build_profile(dom: Domain1D, spec: dict, seed: int = 0, where: str = "initial") -> Field:
    """Nodal initial profile from a named descriptor.

    ``single_mode``: amplitude * sin(k pi x / L) for Dirichlet and
    amplitude * (1 - cos(k pi x / L)) / 2 for Neumann (nonnegative for every k).
    """
    x = dom.nodes
    name = spec["profile"]
    if name == "single_mode":
        k = spec["k"]
        amp = spec.get("amplitude", 1.0)
        if dom.boundary == DIRICHLET:
            if k < 1:
                raise ConfigError(f"{where}.k", "Dirichlet modes start at k = 1")
            values = amp * np.sin(k * np.pi * x / dom.length)
        else:
            values = amp * 0.5 * (1.0 - np.cos(k * np.pi * x / dom.length))
    elif name == "bump":
        values = spec["height"] * np.exp(-(((x - spec["center"]) / spec["width"]) ** 2))
    elif name == "constant":
        values = np.full_like(x, spec["c"])
    else:
        rng = np.random.default_rng(spec.get("seed", seed))
        return random_nonnegative_field(dom, rng, spec.get("degree", 6), sup=spec["Lambda"])
    return Field(dom, nodal=values)
