"""Run configs: flat TOML sections, validated in full before anything is computed.

    [lattice]
    blue_dims = [2, 3]
    red_dims = [2, 3]

    [protocol]
    preset = "perturbed"
    omega = 4.0

    [experiment]
    kind = "dynamics"
    observables = ["corner_z", "corner_x", "energy"]
    n_max = 200

Every key has a type and a default; unknown sections or keys are errors. A
manifest written by a previous run is accepted as a config too.
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, NamedTuple

from models.lattice import Lattice
from models.protocol import FloquetProtocol
from services.analysis import DEFAULT_THRESHOLD, DEFAULT_WINDOW, LatticeSpec
from services.circuits import PERTURBATION_PARTS, NoiseModel, PulseConvention
from services.observables import ObservableLabel
from utils.errors import CornerDtcError, ExperimentError

log = logging.getLogger("experiments")


class ConfigInvalid(ExperimentError):
    def __init__(self, line: int, key: str, message: str) -> None:
        self.line = line
        self.key = key
        super().__init__(f"line {line}, {key}: {message}")


class ExperimentKind(str, Enum):
    DYNAMICS = "dynamics"
    FREQUENCY_SWEEP = "frequency-sweep"
    DIMERIZATION_SWEEP = "dimerization-sweep"
    PHASE_SCAN = "phase-scan"
    GAP = "gap"
    CIRCUIT_DYNAMICS = "circuit-dynamics"
    ECHO = "echo"

    @property
    def is_circuit(self) -> bool:
        return self in (ExperimentKind.CIRCUIT_DYNAMICS, ExperimentKind.ECHO)


PRESETS: dict[str, Callable[[], FloquetProtocol]] = {
    "none": FloquetProtocol,
    "ideal": FloquetProtocol.ideal,
    "perturbed": FloquetProtocol.perturbed,
    "dimerized": FloquetProtocol.dimerized,
}
INITIAL_STATES = ("ground", "all_up", "product")
CIRCUIT_PREPARATIONS = ("ground", "none")


class _Key(NamedTuple):
    kind: str
    default: Any


# kind: int, float, bool, str, pair_int, pair_float, shapes, floats, strs, seed
_SCHEMA: dict[str, dict[str, _Key]] = {
    "lattice": {
        "blue_dims": _Key("pair_int", (2, 3)),
        "red_dims": _Key("pair_int", (2, 3)),
        "red_offset": _Key("pair_float", (0.5, 0.5)),
        # extra sizes for frequency sweeps and gap tables: [bx, by, rx, ry] each
        "sizes": _Key("shapes", ()),
    },
    "protocol": {
        "preset": _Key("str", "none"),
        "j_r": _Key("float", None),
        "j_b": _Key("float", None),
        "epsilon": _Key("float", None),
        "h_x": _Key("float", None),
        "h_y": _Key("float", None),
        "h_z": _Key("float", None),
        "v_xx": _Key("float", None),
        "v_zz": _Key("float", None),
        "omega": _Key("float", None),
        "include_corner_k1": _Key("bool", None),
    },
    "experiment": {
        "kind": _Key("str", None),
        "initial": _Key("str", "ground"),
        "product_state": _Key("str", ""),
        "observables": _Key("strs", ("corner_z",)),
        "n_max": _Key("int", 200),
        "omegas": _Key("floats", ()),
        "etas": _Key("floats", ()),
        "scan_parameter": _Key("str", "v_zz"),
        "scan_grid": _Key("floats", ()),
        # V_zz points v whose V_xx lines at v and 1/v test the duality of the phase boundaries
        "duality_points": _Key("floats", ()),
        "duality_grid": _Key("floats", ()),
        "threshold": _Key("float", DEFAULT_THRESHOLD),
        "window": _Key("int", DEFAULT_WINDOW),
    },
    "solver": {
        "tol": _Key("float", 1e-9),
    },
    "circuit": {
        "substeps": _Key("int", 1),
        "convention": _Key("str", PulseConvention.DRIVE.value),
        "perturbations": _Key("strs", PERTURBATION_PARTS),
        "prepare": _Key("str", "ground"),
        # also run the echo of every period count next to the forward run
        "with_echo": _Key("bool", False),
    },
    "noise": {
        "p1": _Key("float", 0.0),
        "p2": _Key("float", 0.0),
        "trajectories": _Key("int", 100),
    },
    "run": {
        "seed": _Key("seed", None),
        "workers": _Key("int", 1),
        "out": _Key("str", "runs"),
    },
}
# run placement does not change results
_NOT_FINGERPRINTED = {("run", "workers"), ("run", "out")}


# --- line lookup ---

_SECTION_RE = re.compile(r"^\s*\[\s*([A-Za-z_][\w-]*)\s*\]")
_KEY_RE = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*=")


def _line_of(text: str | None, section: str, key: str | None = None) -> int:
    """1-based line of ``[section]`` or of ``key`` inside it; 0 when unknown."""
    if not text:
        return 0
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1)
            if key is None and current == section:
                return lineno
            continue
        m = _KEY_RE.match(line)
        if m and current == section and m.group(1) == key:
            return lineno
    return 0


# --- value coercion ---

def _is_number(value: Any) -> bool:
    return isinstance(value, int | float) and not isinstance(value, bool)


def _coerce(kind: str, value: Any) -> Any:
    """Typed value or ValueError with a message."""
    match kind:
        case "int" if isinstance(value, int) and not isinstance(value, bool):
            return value
        case "float" if _is_number(value):
            return float(value)
        case "bool" if isinstance(value, bool):
            return value
        case "str" if isinstance(value, str):
            return value.strip()
        case "seed" if value is None or (isinstance(value, int) and not isinstance(value, bool)):
            if value is not None and value < 0:
                raise ValueError("seed must be >= 0")
            return value
        case "pair_int" if isinstance(value, list | tuple) and len(value) == 2 and all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            return (int(value[0]), int(value[1]))
        case "pair_float" if (
            isinstance(value, list | tuple) and len(value) == 2 and all(map(_is_number, value))
        ):
            return (float(value[0]), float(value[1]))
        case "floats" if isinstance(value, list | tuple) and all(map(_is_number, value)):
            return tuple(float(v) for v in value)
        case "strs" if isinstance(value, list | tuple) and all(isinstance(v, str) for v in value):
            return tuple(v.strip() for v in value)
        case "shapes" if isinstance(value, list | tuple) and all(
            isinstance(s, list | tuple) and len(s) == 4
            and all(isinstance(v, int) and not isinstance(v, bool) for v in s)
            for s in value
        ):
            return tuple(tuple(int(v) for v in s) for s in value)
    raise ValueError(f"expected {kind.replace('_', ' ')}, got {value!r}")


# --- resolved config ---

@dataclass(frozen=True, slots=True)
class LatticeConfig:
    blue_dims: tuple[int, int]
    red_dims: tuple[int, int]
    red_offset: tuple[float, float]
    sizes: tuple[tuple[int, int, int, int], ...] = ()

    @property
    def spec(self) -> LatticeSpec:
        return LatticeSpec(self.blue_dims, self.red_dims, self.red_offset)

    def specs(self) -> list[LatticeSpec]:
        """The main lattice followed by every extra size."""
        extra = [LatticeSpec((s[0], s[1]), (s[2], s[3]), self.red_offset) for s in self.sizes]
        return [self.spec, *(s for s in extra if s != self.spec)]

    def build(self) -> Lattice:
        return self.spec.build()


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    kind: ExperimentKind
    initial: str
    product_state: str
    observables: tuple[str, ...]
    n_max: int
    omegas: tuple[float, ...]
    etas: tuple[float, ...]
    scan_parameter: str
    scan_grid: tuple[float, ...]
    duality_points: tuple[float, ...]
    duality_grid: tuple[float, ...]
    threshold: float
    window: int


@dataclass(frozen=True, slots=True)
class CircuitConfig:
    substeps: int
    convention: PulseConvention
    perturbations: tuple[str, ...]
    prepare: str
    with_echo: bool = False


@dataclass(frozen=True, slots=True)
class RunConfig:
    lattice: LatticeConfig
    protocol: FloquetProtocol
    experiment: ExperimentConfig
    tol: float
    circuit: CircuitConfig
    noise: NoiseModel
    seed: int | None
    workers: int
    out: str
    raw: Mapping[str, Mapping[str, Any]]

    @property
    def kind(self) -> ExperimentKind:
        return self.experiment.kind

    def resolved(self) -> dict[str, dict[str, Any]]:
        """Every section with every key, defaults filled in; JSON-safe."""
        return _jsonable(self.raw)

    @property
    def solver_seed(self) -> int:
        """Seed for eigensolver start blocks; 0 when the config sets none."""
        return self.seed if self.seed is not None else 0

    @property
    def fingerprint(self) -> str:
        payload = {
            section: {k: v for k, v in keys.items() if (section, k) not in _NOT_FINGERPRINTED}
            for section, keys in self.resolved().items()
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def output_dir(self, root: Path | str | None = None) -> Path:
        return Path(root if root is not None else self.out) / f"{self.kind.value}-{self.fingerprint[:12]}"

    def with_overrides(
        self, *, seed: int | None = None, workers: int | None = None, out: str | None = None
    ) -> RunConfig:
        """CLI flags win over the file."""
        run = dict(self.raw["run"])
        if seed is not None:
            run["seed"] = seed
        if workers is not None:
            run["workers"] = workers
        if out is not None:
            run["out"] = out
        raw = {**self.raw, "run": run}
        return from_mapping(raw)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, tuple | list):
        return [_jsonable(v) for v in value]
    return value


# --- validation ---

class _Validator:
    def __init__(self, data: Mapping[str, Any], text: str | None) -> None:
        self.data = data
        self.text = text
        self.values: dict[str, dict[str, Any]] = {}

    def fail(self, section: str, key: str | None, message: str) -> ConfigInvalid:
        line = _line_of(self.text, section, key) or _line_of(self.text, section)
        return ConfigInvalid(line, f"{section}.{key}" if key else section, message)

    def read_sections(self) -> None:
        for section, body in self.data.items():
            if section not in _SCHEMA:
                raise self.fail(section, None, f"unknown section (expected one of {sorted(_SCHEMA)})")
            if not isinstance(body, Mapping):
                raise self.fail(section, None, "expected a table of key = value pairs")
            for key in body:
                if key not in _SCHEMA[section]:
                    raise self.fail(section, key, f"unknown key (expected one of {sorted(_SCHEMA[section])})")
        for section, keys in _SCHEMA.items():
            body = self.data.get(section, {})
            out: dict[str, Any] = {}
            for key, spec in keys.items():
                if key not in body or body[key] is None:
                    out[key] = spec.default
                    continue
                try:
                    out[key] = _coerce(spec.kind, body[key])
                except ValueError as exc:
                    raise self.fail(section, key, str(exc)) from None
            self.values[section] = out

    def require(self, ok: bool, section: str, key: str, message: str) -> None:
        if not ok:
            raise self.fail(section, key, message)

    def protocol(self) -> FloquetProtocol:
        values = self.values["protocol"]
        preset = values["preset"]
        self.require(preset in PRESETS, "protocol", "preset",
                     f"unknown preset (expected one of {sorted(PRESETS)})")
        overrides = {k: v for k, v in values.items() if k != "preset" and v is not None}
        try:
            protocol = PRESETS[preset]().replace(**overrides)
        except CornerDtcError as exc:
            raise self.fail("protocol", None, str(exc)) from None
        # pin the preset's values so the resolved config is self-contained
        values.update(protocol.as_dict())
        return protocol

    def lattice(self) -> LatticeConfig:
        values = self.values["lattice"]
        config = LatticeConfig(values["blue_dims"], values["red_dims"], values["red_offset"], values["sizes"])
        for spec in config.specs():
            try:
                spec.build()
            except CornerDtcError as exc:
                key = "blue_dims" if spec == config.spec else "sizes"
                raise self.fail("lattice", key, str(exc)) from None
        return config

    def experiment(self, lattice: LatticeConfig) -> ExperimentConfig:
        values = self.values["experiment"]
        self.require(values["kind"] is not None, "experiment", "kind", "missing experiment kind")
        try:
            kind = ExperimentKind(values["kind"])
        except ValueError:
            allowed = ", ".join(k.value for k in ExperimentKind)
            raise self.fail("experiment", "kind", f"unknown kind (expected one of {allowed})") from None
        values["initial"] = values["initial"].replace("-", "_")
        self.require(values["initial"] in INITIAL_STATES, "experiment", "initial",
                     f"expected one of {INITIAL_STATES}")
        if values["initial"] == "product":
            n_sites = lattice.build().n_sites
            labels = values["product_state"]
            self.require(len(labels) == n_sites and set(labels) <= set("01+-"), "experiment", "product_state",
                         f"need {n_sites} labels from 0, 1, +, -")
        for label in values["observables"]:
            try:
                ObservableLabel.parse(label)
            except CornerDtcError as exc:
                raise self.fail("experiment", "observables", str(exc)) from None
        self.require(bool(values["observables"]) or kind in (ExperimentKind.PHASE_SCAN, ExperimentKind.GAP),
                     "experiment", "observables", "at least one observable is required")
        self.require(values["n_max"] >= 0, "experiment", "n_max", "must be >= 0")
        self.require(0.0 < values["threshold"] < 1.0, "experiment", "threshold", "must lie in (0, 1)")
        self.require(values["window"] >= 1, "experiment", "window", "must be >= 1")
        if kind is ExperimentKind.FREQUENCY_SWEEP:
            self.require(len(values["omegas"]) >= 2, "experiment", "omegas", "need at least two frequencies")
            self.require(all(w > 0 for w in values["omegas"]), "experiment", "omegas",
                         "frequencies must be > 0")
        if kind is ExperimentKind.DIMERIZATION_SWEEP:
            self.require(bool(values["etas"]), "experiment", "etas", "empty eta grid")
        if kind is ExperimentKind.PHASE_SCAN:
            self.require(values["scan_parameter"] in ("v_zz", "v_xx"), "experiment", "scan_parameter",
                         "expected v_zz or v_xx")
            grid = list(values["scan_grid"])
            self.require(bool(grid) and grid == sorted(grid), "experiment", "scan_grid",
                         "need a non-empty ascending grid")
            points = values["duality_points"]
            self.require(all(v > 0 for v in points), "experiment", "duality_points", "points must be > 0")
            duality_grid = list(values["duality_grid"])
            self.require(not points or (bool(duality_grid) and duality_grid == sorted(duality_grid)),
                         "experiment", "duality_grid", "need a non-empty ascending V_xx grid")
        if kind.is_circuit:
            self.require(ObservableLabel.ENERGY.value not in values["observables"],
                         "experiment", "observables",
                         "energy is not measured on circuits")
        return ExperimentConfig(kind=kind, **{k: v for k, v in values.items() if k != "kind"})

    def circuit(self) -> CircuitConfig:
        values = self.values["circuit"]
        self.require(values["substeps"] >= 1, "circuit", "substeps", "must be >= 1")
        try:
            convention = PulseConvention(values["convention"])
        except ValueError:
            raise self.fail("circuit", "convention", "expected drive or reversed") from None
        unknown = set(values["perturbations"]) - set(PERTURBATION_PARTS)
        self.require(not unknown, "circuit", "perturbations", f"unknown parts {sorted(unknown)}")
        self.require(values["prepare"] in CIRCUIT_PREPARATIONS, "circuit", "prepare",
                     f"expected one of {CIRCUIT_PREPARATIONS}")
        return CircuitConfig(
            values["substeps"], convention, values["perturbations"], values["prepare"], values["with_echo"]
        )

    def noise(self, kind: ExperimentKind) -> NoiseModel:
        values = self.values["noise"]
        seed = self.values["run"]["seed"]
        for key in ("p1", "p2"):
            self.require(0.0 <= values[key] <= 1.0, "noise", key, "must lie in [0, 1]")
        self.require(values["trajectories"] >= 1, "noise", "trajectories", "must be >= 1")
        noisy = values["p1"] > 0 or values["p2"] > 0
        self.require(not (kind.is_circuit and noisy and seed is None), "run", "seed",
                     "noisy circuit runs need an explicit seed")
        return NoiseModel(values["p1"], values["p2"], values["trajectories"], seed)

    def build(self) -> RunConfig:
        self.read_sections()
        protocol = self.protocol()
        lattice = self.lattice()
        experiment = self.experiment(lattice)
        tol = self.values["solver"]["tol"]
        self.require(1e-14 <= tol < 1e-2, "solver", "tol", "must lie in [1e-14, 1e-2)")
        circuit = self.circuit()
        noise = self.noise(experiment.kind)
        run = self.values["run"]
        self.require(run["workers"] >= 1, "run", "workers", "must be >= 1")
        self.require(bool(run["out"]), "run", "out", "empty output directory")
        return RunConfig(
            lattice=lattice,
            protocol=protocol,
            experiment=experiment,
            tol=tol,
            circuit=circuit,
            noise=noise,
            seed=run["seed"],
            workers=run["workers"],
            out=run["out"],
            raw=self.values,
        )


def from_mapping(data: Mapping[str, Any], *, text: str | None = None) -> RunConfig:
    return _Validator(data, text).build()


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigInvalid(int(m.group(1)) if m else 0, "<toml>", str(exc)) from None
    return from_mapping(data, text=text)


def load_config(path: Path | str) -> RunConfig:
    """A TOML config, or the ``manifest.json`` of an earlier run."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(0, str(path), f"cannot read config: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            manifest = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(exc.lineno, str(path), f"bad manifest: {exc.msg}") from None
        if not isinstance(manifest, dict) or "config" not in manifest:
            raise ConfigInvalid(0, "config", "manifest has no embedded config")
        config = from_mapping(manifest["config"])
    else:
        config = parse_config(text)
    log.debug("Loaded %s config from %s (fingerprint %s)", config.kind.value, path, config.fingerprint[:12])
    return config

