"""Scenario configuration: strict JSON schema, resolution to system specs,
and run manifests.

Unknown keys fail fast with the offending JSON path; a manifest written by a
previous run can be fed back as a config (the embedded ``config`` block is
unwrapped), which together with the fixed-step integrator reproduces the
original trajectories byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .evolve import IntegratorConfig, uniform_times
from .model import (
    Boundary,
    CouplingPoint,
    EmitterSpec,
    LatticeSpec,
    SystemSpec,
    derive_parameters,
    validate_spec,
)


def _require(mapping, key, path, kind, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError("missing required key", path=f"{path}.{key}" if path else key)
        return default
    value = mapping[key]
    keypath = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path=keypath)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path=keypath)
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path=keypath)
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected a boolean, got {value!r}", path=keypath)
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"expected a list, got {value!r}", path=keypath)
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"expected an object, got {value!r}", path=keypath)
        return value
    raise AssertionError(kind)


def _reject_unknown(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(
                f"unknown key (allowed: {sorted(allowed)})",
                path=f"{path}.{key}" if path else key,
            )


@dataclass(frozen=True)
class SimulationSettings:
    t_max: float = 40.0
    samples: int = 2000
    excite: str | None = None
    record_fields: bool = False
    method: str = "rk45"
    dt: float | None = None
    rtol: float = 1e-9
    atol: float = 1e-12
    rescale_threshold_log: float = 50.0

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(
            sample_times=uniform_times(self.t_max, self.samples),
            method=self.method,
            dt=self.dt,
            rtol=self.rtol,
            atol=self.atol,
            rescale_threshold=math.exp(self.rescale_threshold_log),
        )


@dataclass(frozen=True)
class ScenarioConfig:
    spec: SystemSpec
    simulation: SimulationSettings
    spectrum_k_count: int = 512
    selfenergy_span: float = 0.9
    selfenergy_points: int = 201
    boundstate_target: float | None = None
    boundstate_tol: float = 1e-10
    boundstate_max_iter: int = 200
    hyperbolic_x0: float = 1.0
    hyperbolic_kappa: float | None = None
    hyperbolic_r_count: int = 40
    hyperbolic_theta_count: int = 60
    out_directory: str | None = None
    formats: tuple[str, ...] = ("csv",)
    raw: dict = field(default_factory=dict, repr=False)


_TOP_KEYS = {"lattice", "emitters", "simulation", "spectrum", "selfenergy",
             "boundstate", "hyperbolic", "outputs"}


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a raw config mapping (strict) and resolve it to specs."""
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    if "config" in data and "lattice" not in data:
        # A manifest fed back as a config: unwrap the embedded block.
        data = _require(data, "config", "", dict, required=True)
        if not isinstance(data, dict):
            raise ConfigError("manifest 'config' block must be an object", path="config")
    _reject_unknown(data, _TOP_KEYS, "")

    lat_raw = _require(data, "lattice", "", dict, required=True)
    _reject_unknown(lat_raw, {"M", "nu", "gamma", "loss", "boundary"}, "lattice")
    boundary = _require(lat_raw, "boundary", "lattice", str, default="obc").lower()
    if boundary not in ("obc", "pbc"):
        raise ConfigError(f"boundary must be 'obc' or 'pbc', got {boundary!r}",
                          path="lattice.boundary")
    try:
        lattice = LatticeSpec(
            m=_require(lat_raw, "M", "lattice", int, required=True),
            nu=_require(lat_raw, "nu", "lattice", float, required=True),
            gamma=_require(lat_raw, "gamma", "lattice", float, required=True),
            onsite_loss=_require(lat_raw, "loss", "lattice", float, default=0.0),
            boundary=Boundary(boundary),
        )
    except Exception as exc:
        raise ConfigError(str(exc), path="lattice") from exc

    emitters = []
    for i, em_raw in enumerate(_require(data, "emitters", "", list, default=[])):
        path = f"emitters[{i}]"
        if not isinstance(em_raw, dict):
            raise ConfigError("expected an object", path=path)
        _reject_unknown(em_raw, {"label", "detuning", "couplings"}, path)
        couplings = []
        for j, cp_raw in enumerate(_require(em_raw, "couplings", path, list, required=True)):
            cpath = f"{path}.couplings[{j}]"
            if not isinstance(cp_raw, dict):
                raise ConfigError("expected an object", path=cpath)
            _reject_unknown(cp_raw, {"site", "strength"}, cpath)
            try:
                couplings.append(
                    CouplingPoint(
                        site=_require(cp_raw, "site", cpath, int, required=True),
                        strength=_require(cp_raw, "strength", cpath, float, required=True),
                    )
                )
            except Exception as exc:
                raise ConfigError(str(exc), path=cpath) from exc
        try:
            emitters.append(
                EmitterSpec(
                    label=_require(em_raw, "label", path, str, required=True),
                    detuning=_require(em_raw, "detuning", path, float, default=0.0),
                    couplings=tuple(couplings),
                )
            )
        except Exception as exc:
            raise ConfigError(str(exc), path=path) from exc

    spec = SystemSpec(lattice=lattice, emitters=tuple(emitters))
    violations = validate_spec(spec)
    if violations:
        raise ConfigError("; ".join(violations))

    sim_raw = _require(data, "simulation", "", dict, default={})
    _reject_unknown(
        sim_raw,
        {"t_max", "samples", "excite", "record_fields", "integrator"},
        "simulation",
    )
    integ_raw = _require(sim_raw, "integrator", "simulation", dict, default={})
    _reject_unknown(
        integ_raw,
        {"method", "dt", "rtol", "atol", "rescale_threshold_log"},
        "simulation.integrator",
    )
    method = _require(integ_raw, "method", "simulation.integrator", str, default="rk45")
    if method not in ("rk45", "rk4"):
        raise ConfigError(
            f"method must be 'rk45' or 'rk4', got {method!r}",
            path="simulation.integrator.method",
        )
    excite = _require(sim_raw, "excite", "simulation", str, default=None)
    if excite is not None and excite not in spec.labels:
        raise ConfigError(
            f"excite label {excite!r} not among emitters {list(spec.labels)}",
            path="simulation.excite",
        )
    simulation = SimulationSettings(
        t_max=_require(sim_raw, "t_max", "simulation", float, default=40.0),
        samples=_require(sim_raw, "samples", "simulation", int, default=2000),
        excite=excite,
        record_fields=_require(sim_raw, "record_fields", "simulation", bool, default=False),
        method=method,
        dt=_require(integ_raw, "dt", "simulation.integrator", float, default=None),
        rtol=_require(integ_raw, "rtol", "simulation.integrator", float, default=1e-9),
        atol=_require(integ_raw, "atol", "simulation.integrator", float, default=1e-12),
        rescale_threshold_log=_require(
            integ_raw, "rescale_threshold_log", "simulation.integrator", float, default=50.0
        ),
    )
    if simulation.t_max <= 0:
        raise ConfigError("t_max must be positive", path="simulation.t_max")
    if simulation.samples < 2:
        raise ConfigError("samples must be >= 2", path="simulation.samples")

    spect_raw = _require(data, "spectrum", "", dict, default={})
    _reject_unknown(spect_raw, {"k_count"}, "spectrum")
    se_raw = _require(data, "selfenergy", "", dict, default={})
    _reject_unknown(se_raw, {"delta_span", "points"}, "selfenergy")
    bs_raw = _require(data, "boundstate", "", dict, default={})
    _reject_unknown(bs_raw, {"target", "tol", "max_iter"}, "boundstate")
    hyp_raw = _require(data, "hyperbolic", "", dict, default={})
    _reject_unknown(hyp_raw, {"x0", "kappa", "r_count", "theta_count"}, "hyperbolic")

    out_raw = _require(data, "outputs", "", dict, default={})
    _reject_unknown(out_raw, {"directory", "formats"}, "outputs")
    formats = tuple(_require(out_raw, "formats", "outputs", list, default=["csv"]))
    for fmt in formats:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}", path="outputs.formats")

    return ScenarioConfig(
        spec=spec,
        simulation=simulation,
        spectrum_k_count=_require(spect_raw, "k_count", "spectrum", int, default=512),
        selfenergy_span=_require(se_raw, "delta_span", "selfenergy", float, default=0.9),
        selfenergy_points=_require(se_raw, "points", "selfenergy", int, default=201),
        boundstate_target=_require(bs_raw, "target", "boundstate", float, default=None),
        boundstate_tol=_require(bs_raw, "tol", "boundstate", float, default=1e-10),
        boundstate_max_iter=_require(bs_raw, "max_iter", "boundstate", int, default=200),
        hyperbolic_x0=_require(hyp_raw, "x0", "hyperbolic", float, default=1.0),
        hyperbolic_kappa=_require(hyp_raw, "kappa", "hyperbolic", float, default=None),
        hyperbolic_r_count=_require(hyp_raw, "r_count", "hyperbolic", int, default=40),
        hyperbolic_theta_count=_require(hyp_raw, "theta_count", "hyperbolic", int, default=60),
        out_directory=_require(out_raw, "directory", "outputs", str, default=None),
        formats=formats or ("csv",),
        raw=data,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not text.strip():
        raise ConfigError(f"config file {path} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def apply_overrides(base: dict, overrides: dict) -> dict:
    """Apply a flat {dotted.path: value} mapping onto a nested config dict.

    List elements are addressed numerically, e.g.
    ``emitters[0].couplings[1].strength``.
    """
    out = json.loads(json.dumps(base))  # deep copy, JSON-typed
    for dotted, value in overrides.items():
        node = out
        parts = dotted.split(".")
        for pos, part in enumerate(parts):
            name, indices = _split_indices(part, dotted)
            last = pos == len(parts) - 1
            if last and not indices:
                node[name] = value
                break
            if name not in node:
                node[name] = {} if not indices else []
            node = node[name]
            for k, idx in enumerate(indices):
                if not isinstance(node, list) or idx >= len(node):
                    raise ConfigError(f"override path {dotted!r}: index {idx} out of range")
                if last and k == len(indices) - 1:
                    node[idx] = value
                    break
                node = node[idx]
    return out


def _split_indices(part: str, dotted: str):
    name = part
    indices = []
    while name.endswith("]"):
        open_br = name.rfind("[")
        if open_br < 0:
            raise ConfigError(f"override path {dotted!r}: malformed segment {part!r}")
        try:
            indices.insert(0, int(name[open_br + 1 : -1]))
        except ValueError:
            raise ConfigError(f"override path {dotted!r}: malformed index in {part!r}") from None
        name = name[:open_br]
    return name, indices


def build_manifest(command, cfg: ScenarioConfig, warnings, duration_s, outputs, extra=None):
    from . import __version__

    lat = cfg.spec.lattice
    derived = derive_parameters(lat)
    beta = derived.beta
    manifest = {
        "tool": "skinbath",
        "version": __version__,
        "command": command,
        "config": cfg.raw,
        "derived": {
            "t_R": derived.t_r,
            "t_L": derived.t_l,
            "beta": beta,
            "kappa": None if beta is None else 4.0 * math.log(beta) ** 2,
            "regime": derived.regime.value,
        },
        "warnings": list(warnings),
        "duration_s": duration_s,
        "outputs": sorted(outputs),
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n",
        encoding="utf-8",
    )


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
