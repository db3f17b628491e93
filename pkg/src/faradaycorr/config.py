"""Run-configuration schema: parsing, validation, and object construction.

The config is one YAML document. Validation is strict: unknown keys are
rejected, and every command checks that the sections it needs are present
before any computation starts.
"""

from __future__ import annotations

import math
import numpy as np
import yaml

from .errors import ConfigError
from .quantum_core import DensityMatrix, TargetModel, pure_state, spin_operators, thermal_state
from .sensor_optics import MeasurementBasis, SensorConfig
from .snr import SnrScenario, lihof4_scenario, load_scenarios
from .trajectory_mc import ClassicalFieldModel, FieldKind
from .weak_measurement import ProtocolSpec, ShotSpec

COMMANDS = ("exact", "simulate", "snr", "sweep")

_SPIN_TERMS = ("jx", "jy", "jz")


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a mapping")
    return raw


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return section[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def validate_config(raw: dict) -> dict:
    """Validate the whole document; returns it unchanged on success."""
    _check_keys(
        raw,
        {"command", "seed", "model", "protocol", "exact", "mc", "snr", "sweep"},
        "top level",
    )
    command = _require(raw, "command", "top level")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}")
    if command == "exact":
        _validate_model(_require(raw, "model", "top level"))
        _validate_protocol(_require(raw, "protocol", "top level"))
        _validate_exact(raw.get("exact", {}))
    elif command == "simulate":
        if "seed" not in raw:
            raise ConfigError("simulate requires an explicit top-level seed")
        _validate_protocol(_require(raw, "protocol", "top level"))
        mc = _require(raw, "mc", "top level")
        _validate_mc(mc)
        if mc.get("mode", "kraus_quantum") == "kraus_quantum":
            _validate_model(_require(raw, "model", "top level"))
    elif command == "snr":
        _validate_snr(_require(raw, "snr", "top level"))
    else:  # sweep
        _validate_sweep(raw)
    return raw


def _validate_model(model: dict) -> None:
    if not isinstance(model, dict):
        raise ConfigError("model must be a mapping")
    kind = _require(model, "kind", "model")
    if kind == "single_spin":
        _check_keys(
            model,
            {"kind", "two_j", "hamiltonian", "coupling", "initial_state", "beta"},
            "model",
        )
        for section in ("hamiltonian", "coupling"):
            terms = _require(model, section, "model")
            if not isinstance(terms, dict):
                raise ConfigError(f"model.{section} must map spin terms to coefficients")
            _check_keys(terms, set(_SPIN_TERMS), f"model.{section}")
            for key, value in terms.items():
                _number(value, f"model.{section}.{key}")
        state = model.get("initial_state", "up")
        if state not in ("up", "down", "thermal"):
            raise ConfigError("model.initial_state must be up | down | thermal")
        if state == "thermal":
            _number(_require(model, "beta", "model"), "model.beta")
    elif kind == "custom":
        _check_keys(
            model,
            {"kind", "hamiltonian_matrix", "coupling_matrix", "initial_state_matrix"},
            "model",
        )
        for key in ("hamiltonian_matrix", "coupling_matrix", "initial_state_matrix"):
            _require(model, key, "model")
    else:
        raise ConfigError(f"unknown model kind {kind!r}")


def _validate_protocol(proto: dict) -> None:
    if not isinstance(proto, dict):
        raise ConfigError("protocol must be a mapping")
    _check_keys(proto, {"alpha", "tau", "shots", "final_time_grid"}, "protocol")
    _number(_require(proto, "alpha", "protocol"), "protocol.alpha")
    _number(_require(proto, "tau", "protocol"), "protocol.tau")
    shots = _require(proto, "shots", "protocol")
    if not isinstance(shots, list) or not shots:
        raise ConfigError("protocol.shots must be a non-empty list")
    for i, shot in enumerate(shots):
        if not isinstance(shot, dict):
            raise ConfigError(f"protocol.shots[{i}] must be a mapping")
        _check_keys(shot, {"time", "basis"}, f"protocol.shots[{i}]")
        _number(_require(shot, "time", f"protocol.shots[{i}]"), "shot time")
        basis = _require(shot, "basis", f"protocol.shots[{i}]")
        if basis not in ("S2", "S3"):
            raise ConfigError(f"shot basis must be S2 or S3, got {basis!r}")
    grid = proto.get("final_time_grid")
    if grid is not None:
        if not isinstance(grid, list) or not grid:
            raise ConfigError("protocol.final_time_grid must be a non-empty list")
        for value in grid:
            _number(value, "protocol.final_time_grid entry")


def _validate_exact(section: dict) -> None:
    if not isinstance(section, dict):
        raise ConfigError("exact must be a mapping")
    _check_keys(section, {"include_exact_unitary", "engine", "n_max"}, "exact")
    engine = section.get("engine", "coherent")
    if engine not in ("coherent", "fock"):
        raise ConfigError("exact.engine must be coherent | fock")


def _validate_mc(section: dict) -> None:
    if not isinstance(section, dict):
        raise ConfigError("mc must be a mapping")
    _check_keys(section, {"sequences", "mode", "field"}, "mc")
    sequences = _require(section, "sequences", "mc")
    if not isinstance(sequences, int) or sequences < 1:
        raise ConfigError("mc.sequences must be a positive integer")
    mode = section.get("mode", "kraus_quantum")
    if mode not in ("kraus_quantum", "semiclassical_field"):
        raise ConfigError("mc.mode must be kraus_quantum | semiclassical_field")
    if mode == "semiclassical_field":
        field = _require(section, "field", "mc")
        _check_keys(field, {"kind", "amplitude", "correlation_time"}, "mc.field")
        kind = _require(field, "kind", "mc.field")
        if kind not in [k.value for k in FieldKind]:
            raise ConfigError(f"unknown field kind {kind!r}")
        _number(_require(field, "amplitude", "mc.field"), "mc.field.amplitude")


def _validate_snr(section: dict) -> None:
    if not isinstance(section, dict):
        raise ConfigError("snr must be a mapping")
    _check_keys(section, {"preset", "preset_file", "scenario", "orders", "L", "xi"}, "snr")
    has_source = ("preset" in section) or ("scenario" in section) or ("preset_file" in section)
    if not has_source:
        raise ConfigError("snr needs a preset, preset_file, or inline scenario")
    orders = section.get("orders", [section.get("scenario", {}).get("K")])
    if not isinstance(orders, list) or not orders:
        raise ConfigError("snr.orders must be a non-empty list")
    if "scenario" in section:
        scen = section["scenario"]
        _check_keys(
            scen,
            {"g", "D", "n_s", "A", "N_ph", "L", "K", "moment_k", "xi"},
            "snr.scenario",
        )


def _validate_sweep(raw: dict) -> None:
    sweep = _require(raw, "sweep", "top level")
    _check_keys(sweep, {"command", "path", "values"}, "sweep")
    base = _require(sweep, "command", "sweep")
    if base not in ("exact", "simulate", "snr"):
        raise ConfigError("sweep.command must be exact | simulate | snr")
    path = _require(sweep, "path", "sweep")
    if not isinstance(path, str) or not path:
        raise ConfigError("sweep.path must be a non-empty dotted key path")
    values = _require(sweep, "values", "sweep")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values must be a non-empty list")
    # validate the base command with the first value substituted
    probe = dict(raw)
    probe["command"] = base
    probe.pop("sweep")
    probe = set_config_path(probe, path, values[0])
    validate_config(probe)


def set_config_path(raw: dict, path: str, value) -> dict:
    """Return a deep copy of the document with the dotted path replaced."""
    import copy

    doc = copy.deepcopy(raw)
    keys = path.split(".")
    node = doc
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"sweep path {path!r} does not resolve")
        node = node[key]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"sweep path {path!r} does not resolve")
    node[keys[-1]] = value
    return doc


# -- object builders ----------------------------------------------------------


def _complex_matrix(rows, where: str) -> np.ndarray:
    try:
        def to_c(x):
            if isinstance(x, (list, tuple)):
                re, im = x
                return complex(re, im)
            return complex(x)

        return np.array([[to_c(x) for x in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} is not a valid matrix: {exc}") from exc


def build_model(model_cfg: dict) -> TargetModel:
    if model_cfg["kind"] == "custom":
        h = _complex_matrix(model_cfg["hamiltonian_matrix"], "model.hamiltonian_matrix")
        b = _complex_matrix(model_cfg["coupling_matrix"], "model.coupling_matrix")
        rho = _complex_matrix(model_cfg["initial_state_matrix"], "model.initial_state_matrix")
        return TargetModel(hamiltonian=h, coupling=b, initial_state=DensityMatrix(rho))
    two_j = int(model_cfg.get("two_j", 1))
    ops = dict(zip(_SPIN_TERMS, spin_operators(two_j)))
    def combine(terms: dict) -> np.ndarray:
        out = np.zeros((two_j + 1, two_j + 1), dtype=complex)
        for key, coeff in terms.items():
            out = out + float(coeff) * ops[key]
        return out

    h = combine(model_cfg["hamiltonian"])
    b = combine(model_cfg["coupling"])
    state_kind = model_cfg.get("initial_state", "up")
    if state_kind == "thermal":
        rho = thermal_state(h, float(model_cfg["beta"]))
    else:
        ket = np.zeros(two_j + 1)
        ket[0 if state_kind == "up" else two_j] = 1.0
        rho = pure_state(ket)
    return TargetModel(hamiltonian=h, coupling=b, initial_state=rho)


def build_protocols(proto_cfg: dict) -> list[ProtocolSpec]:
    """One ProtocolSpec per final-time grid point (or a single one)."""
    sensor = SensorConfig(alpha=float(proto_cfg["alpha"]), tau=float(proto_cfg["tau"]))
    shots = tuple(
        ShotSpec(time=float(s["time"]), basis=MeasurementBasis(s["basis"]))
        for s in proto_cfg["shots"]
    )
    grid = proto_cfg.get("final_time_grid")
    if grid is None:
        return [ProtocolSpec(shots=shots, sensor=sensor)]
    protocols = []
    for t in grid:
        varied = shots[:-1] + (ShotSpec(time=float(t), basis=shots[-1].basis),)
        protocols.append(ProtocolSpec(shots=varied, sensor=sensor))
    return protocols


def build_field(field_cfg: dict) -> ClassicalFieldModel:
    return ClassicalFieldModel(
        kind=FieldKind(field_cfg["kind"]),
        amplitude=float(field_cfg["amplitude"]),
        correlation_time=float(field_cfg.get("correlation_time", math.inf)),
    )


def build_scenarios(snr_cfg: dict) -> list[tuple[int, SnrScenario]]:
    """Expand the snr section into (K, scenario) pairs."""
    L = float(snr_cfg.get("L", 1.0))
    xi = snr_cfg.get("xi")
    orders = [int(k) for k in snr_cfg.get("orders", [])]
    out = []
    if "scenario" in snr_cfg:
        params = dict(snr_cfg["scenario"])
        params.setdefault("L", L)
        base_orders = orders or [int(params["K"])]
        for k in base_orders:
            p = dict(params)
            p["K"] = k
            out.append((k, SnrScenario(**p)))
        return out
    if "preset_file" in snr_cfg:
        named = load_scenarios(snr_cfg["preset_file"])
        for name, scen in named.items():
            out.append((scen.K, scen))
        return out
    preset = snr_cfg["preset"]
    if preset != "lihof4":
        raise ConfigError(f"unknown preset {preset!r}")
    if not orders:
        raise ConfigError("snr.orders is required with a preset")
    for k in orders:
        out.append((k, lihof4_scenario(K=k, L=L, xi=xi)))
    return out
