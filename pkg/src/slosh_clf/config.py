"""Scenario files: ``[section]`` headers and ``key = value`` lines, ``#`` comments.

Only the tank geometry (``L``, ``m``, ``H_max``) is mandatory. ``k = auto``
picks half the admissible position gain for the requested initial level.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from .analysis import theta, spill_radius_R
from .harness import InitialConditionSpec, make_initial_condition
from .model import (
    ControlGains,
    Grid,
    ParameterError,
    PhysicalParams,
    SloshError,
    TankState,
    validate_gains,
    validate_params,
)
from .solver import StepControls


class ConfigError(SloshError, ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _k(text: str):
    return None if text.lower() == "auto" else float(text)


REQUIRED = object()

# section -> key -> (converter, default text or value)
_SCHEMA: dict[str, dict[str, tuple[Any, Any]]] = {
    "physical": {
        "g": (float, 9.81),
        "mu": (float, 0.1),
        "sigma": (float, 0.073),
        "L": (float, REQUIRED),
        "m": (float, REQUIRED),
        "H_max": (float, REQUIRED),
    },
    "gains": {
        "omega": (float, 1.0),
        "k": (_k, "auto"),
        "q": (float, 1.0),
        "delta": (float, 1.0),
    },
    "grid": {"N": (int, 256)},
    "initial": {
        "mode": (str, "combined"),
        "amplitudes": (_floats, (1.0,)),
        "velocity_amplitudes": (_floats, (0.5,)),
        "xi0": (float, 1.0),
        "w0": (float, 0.0),
        "target_r_fraction": (float, 0.5),
    },
    "stepping": {
        "cfl_safety": (float, 0.4),
        "dt_max": (float, 1e-2),
        "t_end": (float, 40.0),
        "output_stride": (int, 100),
    },
    "output": {"dir": (str, "."), "profiles": (_bool, False)},
}


@dataclass(frozen=True)
class ScenarioConfig:
    params: PhysicalParams
    gains: ControlGains
    k_auto: bool
    n_cells: int
    initial: InitialConditionSpec
    stepping: StepControls
    out_dir: str = "."
    profiles: bool = False
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def grid(self) -> Grid:
        return Grid(self.n_cells, self.params.L)

    def with_value(self, name: str, value: str) -> "ScenarioConfig":
        """Copy with one ``key`` or ``section.key`` overridden (text value)."""
        section, key = resolve_key(name)
        raw = {s: dict(v) for s, v in self.raw.items()}
        raw.setdefault(section, {})[key] = (value, 0)
        return _build(raw)


def resolve_key(name: str) -> tuple[str, str]:
    """(section, key) for ``key`` or ``section.key``; bare keys must be unambiguous."""
    if "." in name:
        section, key = name.split(".", 1)
    else:
        hits = [s for s, keys in _SCHEMA.items() if name in keys]
        if len(hits) != 1:
            raise ConfigError(f"unknown or ambiguous parameter {name!r}")
        section, key = hits[0], name
    if key not in _SCHEMA.get(section, {}):
        raise ConfigError(f"unknown parameter {name!r}")
    return section, key


def parse_config(text: str) -> ScenarioConfig:
    raw: dict[str, dict[str, tuple[str, int]]] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            raw.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if key in raw[section]:
            first = raw[section][key][1]
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first set on line {first})")
        raw[section][key] = (value, lineno)
    return _build(raw)


def _build(raw: dict) -> ScenarioConfig:
    vals: dict[str, dict[str, Any]] = {}
    for section, keys in _SCHEMA.items():
        vals[section] = {}
        for key, (conv, default) in keys.items():
            if key in raw.get(section, {}):
                text, lineno = raw[section][key]
                try:
                    vals[section][key] = conv(text)
                except ValueError as exc:
                    where = f"line {lineno}: " if lineno else ""
                    raise ConfigError(f"{where}bad value for {section}.{key}: {exc}") from None
            elif default is REQUIRED:
                raise ConfigError(f"missing required key {key!r} in [{section}]")
            else:
                vals[section][key] = conv(default) if isinstance(default, str) else default
    try:
        params = validate_params(PhysicalParams(**vals["physical"]))
        g = vals["gains"]
        k_auto = g["k"] is None
        gains = ControlGains(omega=g["omega"], k=1.0 if k_auto else g["k"], q=g["q"], delta=g["delta"])
        validate_gains(gains)
        initial = InitialConditionSpec(**vals["initial"])
        stepping = StepControls(**vals["stepping"])
        Grid(vals["grid"]["N"], params.L)
    except (ParameterError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    cfg = ScenarioConfig(
        params=params,
        gains=gains,
        k_auto=k_auto,
        n_cells=vals["grid"]["N"],
        initial=initial,
        stepping=stepping,
        out_dir=vals["output"]["dir"],
        profiles=vals["output"]["profiles"],
        raw=raw,
    )
    if k_auto:
        # provisional value, refined once the initial state exists
        r = initial.target_r_fraction * spill_radius_R(params, gains.delta)
        cfg = replace(cfg, gains=replace(gains, k=0.5 * gains.q * theta(r, params, gains)))
    return cfg


def build_scenario(cfg: ScenarioConfig) -> tuple[TankState, ControlGains]:
    """Initial state and the gains to run it with.

    With ``k = auto`` the state is generated under the provisional k (set from
    the targeted level), then k is reset to q * theta(r) / 2 at r = V(state).
    """
    grid = cfg.grid
    ic, r = make_initial_condition(cfg.initial, cfg.params, cfg.gains, grid)
    gains = cfg.gains
    if cfg.k_auto:
        gains = replace(gains, k=0.5 * gains.q * theta(r, cfg.params, gains))
    return ic, gains


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config(text)
