# SPDX-License-Identifier: MIT
"""Scenario files: loading, validation, defaults and construction.

A scenario is a JSON document with a mandatory ``schema`` version. It is
validated in two passes: the structure against the bundled JSON schema, then
the meaning (dimensions, seeds, temperatures the chosen propagator needs).
Every problem is reported as ``<path>: <message>``; nothing is built from an
invalid file.
"""

from __future__ import annotations

import copy
import json
import logging
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from jsonschema import Draft202012Validator
from packaging.version import InvalidVersion, Version

from qthermo.errors import ConfigError, QthermoError
from qthermo.hamiltonian import HamiltonianTriple, LinearModel, Protocol
from qthermo.operators import HilbertDims, random_hermitian
from qthermo.propagators import (
    ConstrainedPolicy,
    ConstitutiveOmega,
    NoDissipation,
    ReservoirPolicy,
    ReservoirSpec,
    SeparationPolicy,
    environment_balance_temperature,
    inert_internal_temperature,
)
from qthermo.state import (
    DensityOperator,
    Units,
    canonical,
    from_weights,
    microcanonical,
    product_state,
    random_density,
)
from qthermo.thermo import Temperatures

SCHEMA_VERSION = "1.0"
OUTPUT_ENV = "QTHERMO_OUTPUT_DIR"

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class Defaults:
    """Default values for optional scenario fields"""

    constants = {"k_B": 1.0, "hbar": 1.0, "Z": 1.0}
    integration = {"t_start": 0.0, "sample_every": 1}
    tolerances = {
        "first_law": 1e-9,
        "inequality": 1e-10,
        "equilibrium": 1e-9,
        "residual": 1e-8,
    }
    output = {"csv": "ledger.csv", "report": "report.json"}
    propagator = {"policy": "none"}
    temperatures = {"mode": "prescribed"}
    omega = {"kappa": 0.0, "kind": "linear", "shape": 1.0}
    output_dir = "qthermo-output"


def default_output_dir() -> str:
    """Output directory used when none is given on the command line"""
    return os.environ.get(OUTPUT_ENV) or Defaults.output_dir


def load_schema() -> dict:
    """The bundled scenario JSON schema"""
    p = os.path.join(os.path.dirname(__file__), "schema", "scenario.json")
    with open(p, "r", encoding="utf-8") as f:
        return json.load(f)


def load(path) -> dict:
    """Read a scenario file without validating it"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: a scenario must be a JSON object")
    return payload


def dump(payload: dict, path) -> None:
    """Write a scenario back to disk; ``load`` of the result is ``payload``"""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _json_path(parts) -> str:
    out = "$"
    for part in parts:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _check_version(payload: dict) -> list:
    raw = payload.get("schema")
    if not isinstance(raw, str):
        return ["$.schema: a schema version string is required"]
    try:
        found = Version(raw)
    except InvalidVersion:
        return [f"$.schema: {raw!r} is not a version"]
    if found.major != Version(SCHEMA_VERSION).major:
        return [f"$.schema: version {raw} is not supported (expected {SCHEMA_VERSION})"]
    return []


def validate(payload: dict) -> list:
    """Every problem with a scenario, as ``<path>: <message>`` strings"""
    errors = _check_version(payload)
    validator = Draft202012Validator(load_schema())
    structural = sorted(validator.iter_errors(payload), key=lambda e: list(e.absolute_path))
    errors += [f"{_json_path(e.absolute_path)}: {e.message}" for e in structural]
    if errors:
        return errors
    return _semantic_errors(resolve(payload))


def resolve(payload: dict) -> dict:
    """A copy of ``payload`` with every optional block filled with its defaults"""
    out = copy.deepcopy(payload)
    dims = out["dims"]
    if len(dims) == 1:
        out["dims"] = [dims[0], 1]
    out["constants"] = {**Defaults.constants, **out.get("constants", {})}
    out["integration"] = {**Defaults.integration, **out["integration"]}
    out["tolerances"] = {**Defaults.tolerances, **out.get("tolerances", {})}
    out["output"] = {**Defaults.output, **out.get("output", {})}
    out["temperatures"] = {**Defaults.temperatures, **out.get("temperatures", {})}
    propagator = {**Defaults.propagator, **out.get("propagator", {})}
    if propagator["policy"] == "separation":
        propagator.setdefault("gamma", 1.0)
        propagator.setdefault("target", "full")
    elif propagator["policy"] == "constrained":
        propagator["omega_ex"] = {**Defaults.omega, **propagator.get("omega_ex", {})}
        propagator["omega_int"] = {**Defaults.omega, **propagator.get("omega_int", {})}
        propagator.setdefault("mode", "unrestricted")
        propagator.setdefault("partition", "general")
        propagator.setdefault("separation_rate", 0.0)
    elif propagator["policy"] == "reservoir" and "reservoir" in propagator:
        propagator["reservoir"] = {"rate": 0.0, **propagator["reservoir"]}
    out["propagator"] = propagator
    hamiltonian = out["hamiltonian"]
    hamiltonian.setdefault("h2", {"base": {"zero": True}})
    hamiltonian.setdefault("h12", {"base": {"zero": True}})
    out.setdefault("protocols", {})
    return out


def _uses_random(node) -> bool:
    if isinstance(node, dict):
        if "random" in node:
            return True
        return any(_uses_random(v) for v in node.values())
    if isinstance(node, list):
        return any(_uses_random(v) for v in node)
    return False


def _operator_errors(spec: dict, dim: int, path: str, dims: list) -> list:
    if "literal" in spec:
        rows = spec["literal"]
        if len(rows) != dim or any(len(r) != dim for r in rows):
            got = f"{len(rows)}x{len(rows[0]) if rows else 0}"
            return [f"{path}.literal: expected a {dim}x{dim} matrix, got {got}"]
    elif "diagonal" in spec and len(spec["diagonal"]) != dim:
        return [f"{path}.diagonal: expected {dim} entries, got {len(spec['diagonal'])}"]
    elif ("two_level" in spec or "pauli" in spec) and dim != 2:
        return [f"{path}: only defined for dimension 2, got {dim}"]
    elif "product" in spec:
        if dim != dims[0] * dims[1]:
            return [f"{path}.product: only allowed on the composite space"]
        return _operator_errors(spec["product"][0], dims[0], f"{path}.product[0]", dims) + (
            _operator_errors(spec["product"][1], dims[1], f"{path}.product[1]", dims)
        )
    return []


def _semantic_errors(cfg: dict) -> list:
    errors = []
    d1, d2 = cfg["dims"]
    dims = [d1, d2]
    h = cfg["hamiltonian"]
    for name, dim, keys in (
        ("h1", d1, ("base", "own", "coupling")),
        ("h2", d2, ("base", "own", "coupling")),
        ("h12", d1 * d2, ("base", "coupling")),
    ):
        for key in keys:
            specs = h[name].get(key)
            if specs is None:
                continue
            if key == "base":
                errors += _operator_errors(specs, dim, f"$.hamiltonian.{name}.base", dims)
                continue
            for i, spec in enumerate(specs):
                errors += _operator_errors(spec, dim, f"$.hamiltonian.{name}.{key}[{i}]", dims)
    for name in ("h1", "h2"):
        if "product" in h[name]["base"]:
            errors.append(f"$.hamiltonian.{name}.base: products are only allowed in h12")

    generators = {
        "a1": len(h["h1"].get("own", [])),
        "a2": len(h["h2"].get("own", [])),
        "a12": max(len(h[n].get("coupling", [])) for n in ("h1", "h2", "h12")),
    }
    for name, count in generators.items():
        protocol = cfg["protocols"].get(name)
        if protocol is None:
            if count:
                errors.append(f"$.protocols.{name}: required by {count} generator(s)")
            continue
        times, values = protocol["times"], protocol["values"]
        if len(times) != len(values):
            errors.append(f"$.protocols.{name}: {len(times)} times but {len(values)} value rows")
        if any(len(row) < count for row in values):
            errors.append(f"$.protocols.{name}.values: every row needs {count} value(s)")
        if any(b <= a for a, b in zip(times, times[1:])):
            errors.append(f"$.protocols.{name}.times: must be strictly increasing")

    if _uses_random(h) or cfg["initial_state"]["kind"] == "random":
        if "seed" not in cfg:
            errors.append("$.seed: required when a random operator or state is used")

    errors += _initial_errors(cfg["initial_state"], d1, d2)
    errors += _integration_errors(cfg["integration"])
    errors += _propagator_errors(cfg["propagator"], cfg["temperatures"], d1, d2)
    return errors


def _initial_errors(initial: dict, d1: int, d2: int) -> list:
    kind = initial["kind"]
    total = d1 * d2
    path = "$.initial_state"
    if kind == "canonical" and "theta" not in initial:
        return [f"{path}.theta: required for a canonical state"]
    if kind == "product_canonical":
        if d2 == 1:
            return [f"{path}.kind: product_canonical needs two sub-systems"]
        missing = [k for k in ("theta1", "theta2") if k not in initial]
        return [f"{path}.{k}: required for a product_canonical state" for k in missing]
    if kind == "pure" and initial.get("index", 0) >= total:
        return [f"{path}.index: {initial['index']} is outside dimension {total}"]
    if kind == "weights":
        weights = initial.get("weights")
        if weights is None or len(weights) != total:
            return [f"{path}.weights: expected {total} weights"]
        if abs(sum(weights) - 1.0) > 1e-10:
            return [f"{path}.weights: weights sum to {sum(weights)!r}, not 1"]
    if kind == "literal":
        rows = initial.get("matrix")
        if rows is None or len(rows) != total or any(len(r) != total for r in rows):
            return [f"{path}.matrix: expected a {total}x{total} matrix"]
    if kind == "random" and initial.get("rank", 1) > total:
        return [f"{path}.rank: larger than dimension {total}"]
    return []


def _integration_errors(integration: dict) -> list:
    span = integration["t_end"] - integration["t_start"]
    if span <= 0:
        return ["$.integration.t_end: must be after t_start"]
    n = round(span / integration["dt"])
    if abs(n * integration["dt"] - span) > 1e-9 * max(1.0, span):
        return ["$.integration.dt: the time span is not a whole number of steps"]
    return []


def _propagator_errors(propagator: dict, temps: dict, d1: int, d2: int) -> list:
    policy = propagator["policy"]
    path = "$.propagator"
    errors = []
    if policy == "separation" and propagator["target"] == "local" and d2 == 1:
        errors.append(f"{path}.target: local separation needs two sub-systems")
    if policy == "reservoir":
        if d2 == 1:
            errors.append(f"{path}.policy: the reservoir is sub-system #2, which is missing")
        if "reservoir" not in propagator:
            errors.append(f"{path}.reservoir: required by the reservoir policy")
    if policy != "constrained":
        return errors
    bipartite = d2 > 1
    contact = ("theta1", "theta2") if bipartite else ("theta1",)
    if not bipartite and "theta1" not in temps and "theta" in temps:
        contact = ("theta",)
    if propagator["omega_ex"]["kappa"] > 0:
        for name in contact + ("t_box",):
            if name not in temps:
                errors.append(f"$.temperatures.{name}: required by the external constitutive law")
    if bipartite:
        for name in ("theta1", "theta2", "t1"):
            if name not in temps:
                errors.append(f"$.temperatures.{name}: required by the constrained policy")
        if propagator["partition"] != "inert" and "t2" not in temps:
            errors.append("$.temperatures.t2: required unless the partition is inert")
    return sorted(set(errors))


def _complex_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def _operator(spec: dict, dim: int, rng: Optional[np.random.Generator], dims: HilbertDims) -> np.ndarray:
    if "literal" in spec:
        return _complex_matrix(spec["literal"])
    if "diagonal" in spec:
        return np.diag(np.asarray(spec["diagonal"], dtype=complex))
    if "two_level" in spec:
        return np.diag([0.0, spec["two_level"]]).astype(complex)
    if "pauli" in spec:
        return PAULI[spec["pauli"]].copy()
    if "random" in spec:
        return random_hermitian(dim, rng, spec["random"].get("scale", 1.0))
    if "product" in spec:
        first, second = spec["product"]
        return np.kron(_operator(first, dims.d1, rng, dims), _operator(second, dims.d2, rng, dims))
    return np.zeros((dim, dim), dtype=complex)


def _model(spec: dict, dim: int, rng, dims: HilbertDims) -> LinearModel:
    return LinearModel(
        base=_operator(spec["base"], dim, rng, dims),
        own=tuple(_operator(s, dim, rng, dims) for s in spec.get("own", [])),
        coupling=tuple(_operator(s, dim, rng, dims) for s in spec.get("coupling", [])),
    )


def _protocol(spec: Optional[dict]) -> Protocol:
    if spec is None:
        return Protocol.constant()
    return Protocol(spec["times"], spec["values"])


def _omega(spec: dict) -> ConstitutiveOmega:
    return ConstitutiveOmega(kappa=spec["kappa"], kind=spec["kind"], shape=spec["shape"])


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """A validated scenario with every object the runner needs"""

    name: str
    dims: HilbertDims
    units: Units
    z: float
    triple: HamiltonianTriple
    initial: DensityOperator
    policy: object
    temperatures: Temperatures
    t_span: tuple
    dt: float
    sample_every: int
    tolerances: dict
    output: dict
    resolved: dict
    reservoir: Optional[ReservoirSpec] = None
    omega_ex: Optional[ConstitutiveOmega] = None
    omega_int: Optional[ConstitutiveOmega] = None
    seed: Optional[int] = None
    description: str = ""

    @classmethod
    def from_dict(cls, payload: dict) -> ScenarioConfig:
        """Validate and build a scenario.

        Raises:
            ConfigError: the scenario is invalid; ``errors`` lists every problem
        """
        errors = validate(payload)
        if errors:
            raise ConfigError(errors)
        cfg = resolve(payload)
        try:
            return cls._build(cfg)
        except ConfigError:
            raise
        except QthermoError as e:
            raise ConfigError(f"$: {e}") from e

    @classmethod
    def from_file(cls, path) -> ScenarioConfig:
        return cls.from_dict(load(path))

    @classmethod
    def _build(cls, cfg: dict) -> ScenarioConfig:
        dims = HilbertDims(*cfg["dims"])
        constants = cfg["constants"]
        units = Units(constants["k_B"], constants["hbar"])
        seed = cfg.get("seed")
        rng = np.random.default_rng(seed) if seed is not None else None
        h = cfg["hamiltonian"]
        protocols = cfg["protocols"]
        triple = HamiltonianTriple(
            dims=dims,
            h1=_model(h["h1"], dims.d1, rng, dims),
            h2=_model(h["h2"], dims.d2, rng, dims),
            h12=_model(h["h12"], dims.total, rng, dims),
            a1=_protocol(protocols.get("a1")),
            a2=_protocol(protocols.get("a2")),
            a12=_protocol(protocols.get("a12")),
        )
        integration = cfg["integration"]
        t_span = (integration["t_start"], integration["t_end"])
        initial = _initial_state(cfg["initial_state"], triple, dims, units, rng, t_span[0])

        propagator = cfg["propagator"]
        omega_ex = omega_int = reservoir = None
        if propagator["policy"] == "constrained":
            omega_ex = _omega(propagator["omega_ex"])
            omega_int = _omega(propagator["omega_int"])
        temps = _temperatures(cfg["temperatures"], propagator, dims, omega_ex)
        policy = NoDissipation()
        if propagator["policy"] == "separation":
            policy = SeparationPolicy(
                gamma=propagator["gamma"], target=propagator["target"], z=constants["Z"]
            )
        elif propagator["policy"] == "reservoir":
            spec = propagator["reservoir"]
            reservoir = ReservoirSpec(spec["temperature"], spec["rate"])
            policy = ReservoirPolicy(reservoir, units)
        elif propagator["policy"] == "constrained":
            policy = ConstrainedPolicy(
                temperatures=temps,
                omega_ex=omega_ex,
                omega_int=omega_int,
                mode=propagator["mode"],
                separation_rate=propagator["separation_rate"],
                units=units,
            )
        logging.debug("Scenario %s: dims %s, policy %s", cfg["name"], dims, propagator["policy"])
        return cls(
            name=cfg["name"],
            dims=dims,
            units=units,
            z=constants["Z"],
            triple=triple,
            initial=initial,
            policy=policy,
            temperatures=temps,
            t_span=t_span,
            dt=integration["dt"],
            sample_every=integration["sample_every"],
            tolerances=cfg["tolerances"],
            output=cfg["output"],
            resolved=cfg,
            reservoir=reservoir,
            omega_ex=omega_ex,
            omega_int=omega_int,
            seed=seed,
            description=cfg.get("description", ""),
        )


def _initial_state(spec: dict, triple: HamiltonianTriple, dims: HilbertDims, units: Units, rng, t0) -> DensityOperator:
    kind = spec["kind"]
    snapshot = triple.at(t0)
    if kind == "canonical":
        return canonical(snapshot.h, spec["theta"], units.k_B, dims)
    if kind == "product_canonical":
        return product_state(
            canonical(snapshot.h1_local, spec["theta1"], units.k_B),
            canonical(snapshot.h2_local, spec["theta2"], units.k_B),
        )
    if kind == "microcanonical":
        return microcanonical(dims)
    if kind == "pure":
        weights = np.zeros(dims.total)
        weights[spec.get("index", 0)] = 1.0
        return from_weights(weights, np.eye(dims.total), dims)
    if kind == "weights":
        return from_weights(spec["weights"], np.eye(dims.total), dims)
    if kind == "random":
        return random_density(dims, rng, spec.get("rank"))
    return DensityOperator(_complex_matrix(spec["matrix"]), dims)


def _temperatures(spec: dict, propagator: dict, dims: HilbertDims, omega_ex) -> Temperatures:
    values = dict(spec)
    mode = values.pop("mode")
    if propagator["policy"] == "constrained" and propagator["partition"] == "inert" and dims.d2 > 1:
        values["t2"] = inert_internal_temperature(values["theta1"], values["theta2"], values["t1"])
    if dims.d2 == 1:
        values.setdefault("theta", values.get("theta1"))
    elif "theta" not in values and omega_ex is not None and omega_ex.kappa > 0:
        values["theta"] = environment_balance_temperature(
            omega_ex, (values["theta1"], values["theta2"])
        )
    return Temperatures(mode=mode, **{k: v for k, v in values.items() if v is not None})

