"""JSON run configuration: schema, loading and conversion to domain objects."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .coefficients import EquationSpec
from .errors import InvalidConfig
from .state import SpectralState

__all__ = ["RunConfig", "SCHEMA", "load_config", "bundled_configs", "resolve_config_path"]

_PAIR = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}

SCHEMA = {
    "type": "object",
    "required": ["m"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "m": {"type": "integer", "minimum": 1},
        "a": {"type": "array", "items": _PAIR},
        "b": {"type": "array", "items": _PAIR},
        "domain": {
            "type": "object",
            "required": ["type", "cutoff"],
            "additionalProperties": False,
            "properties": {
                "type": {"const": "torus"},
                "cutoff": {"type": "integer", "minimum": 1},
            },
        },
        "initial": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["modes"],
                    "additionalProperties": False,
                    "properties": {
                        "modes": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "prefixItems": [
                                    {"type": "integer"},
                                    {"type": "number"},
                                    {"type": "number"},
                                ],
                                "minItems": 3,
                                "maxItems": 3,
                            },
                        }
                    },
                },
                {
                    "type": "object",
                    "required": ["random_hs"],
                    "additionalProperties": False,
                    "properties": {
                        "random_hs": {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {
                                "s": {"type": "number"},
                                "seed": {"type": "integer"},
                                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                            },
                        }
                    },
                },
                {
                    "type": "object",
                    "required": ["delta"],
                    "additionalProperties": False,
                    "properties": {
                        "delta": {
                            "type": "object",
                            "required": ["xi"],
                            "additionalProperties": False,
                            "properties": {
                                "xi": {"type": "integer"},
                                "amplitude": _PAIR,
                            },
                        }
                    },
                },
            ]
        },
        "times": {"type": "array", "items": {"type": "number"}},
        "zero_tolerance": {"type": "number", "minimum": 0},
        "seed": {"type": "integer"},
    },
}


@dataclass
class RunConfig:
    m: int
    a: list
    b: list
    K: int = 64
    initial: dict = field(default_factory=lambda: {"random_hs": {}})
    times: list = field(default_factory=lambda: [0.0])
    zero_tolerance: float | None = None
    seed: int = 0
    name: str = ""

    @classmethod
    def from_dict(cls, data):
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise InvalidConfig(f"config invalid at {where}: {exc.message}") from None
        m = data["m"]
        n = 2 * m
        coeffs = {}
        for key in ("a", "b"):
            raw = data.get(key, [])
            if raw and len(raw) != n:
                raise InvalidConfig(f"'{key}' must have 2m = {n} [re, im] pairs, got {len(raw)}")
            coeffs[key] = [complex(re, im) for re, im in raw] or [0j] * n
        times = [float(t) for t in data.get("times", [0.0])]
        if any(t1 < t0 for t0, t1 in zip(times, times[1:])):
            raise InvalidConfig("'times' must be sorted ascending")
        domain = data.get("domain", {"type": "torus", "cutoff": 64})
        return cls(
            m=m,
            a=coeffs["a"],
            b=coeffs["b"],
            K=int(domain["cutoff"]),
            initial=data.get("initial", {"random_hs": {}}),
            times=times,
            zero_tolerance=data.get("zero_tolerance"),
            seed=int(data.get("seed", 0)),
            name=data.get("name", ""),
        )

    def spec(self):
        return EquationSpec(self.m, tuple(self.a), tuple(self.b))

    def tolerance(self):
        """Configured absolute zero tolerance, or 1e-12 * spec.scale() when absent."""
        if self.zero_tolerance is None:
            return 1e-12 * self.spec().scale()
        return float(self.zero_tolerance)

    def initial_state(self, K=None):
        K = self.K if K is None else int(K)
        init = self.initial
        if "modes" in init:
            return SpectralState.from_modes(K, [(x, complex(re, im)) for x, re, im in init["modes"]])
        if "delta" in init:
            d = init["delta"]
            amp = complex(*d.get("amplitude", [1.0, 0.0]))
            if abs(d["xi"]) > K:
                raise InvalidConfig(f"delta mode xi={d['xi']} outside cutoff K={K}")
            return SpectralState.delta(K, d["xi"], amp)
        p = init["random_hs"]
        return SpectralState.random_hs(
            K, float(p.get("s", 0.0)), int(p.get("seed", self.seed)), float(p.get("epsilon", 0.05))
        )


def bundled_configs():
    """Names of the configs shipped inside the package."""
    root = resources.files("dispersive_lab") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_config_path(ref):
    """A filesystem path, or the name of a bundled config (with or without .json)."""
    p = Path(ref)
    if p.exists():
        return p
    name = ref[:-5] if ref.endswith(".json") else ref
    cand = resources.files("dispersive_lab") / "configs" / f"{name}.json"
    if cand.is_file():
        return Path(str(cand))
    raise InvalidConfig(f"config {ref!r} not found (bundled: {', '.join(bundled_configs())})")


def load_config(ref):
    path = resolve_config_path(ref)
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidConfig(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: not valid JSON ({exc})") from None
    return RunConfig.from_dict(data)
