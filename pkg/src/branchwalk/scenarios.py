"""Declarative scenario files and their conversion to runnable bundles.

A scenario is a small TOML (or JSON) document with six sections::

    [scenario]  name, description?
    [system]    family = "circle" | "subshift" | "julia", + parameters
    [weight]    kind = "filter" | "trig" | "symbols" | "constant", + coeffs
    [delta]     mode, rescale?
    [measure]   kind = "lebesgue-grid" | "perron-cylinders" | "brolin-cloud"
    [tests]     family = "trig-modes" | "cylinders" | "moments", + caps
    [run]       depths, tolerance, seed?, budget?

Unknown sections or keys are hard errors with the offending field path —
a typo must never silently change an experiment.  The same schema is
accepted as JSON (one top-level object with the same section names).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .disintegration import ScenarioBundle
from .errors import ConfigError
from .measures import (
    GridDensity,
    brolin_sample,
    cylinder_indicators,
    moment_functions,
    perron_fixed_measure,
    trig_modes,
)
from .systems import CircleMap, QuadraticJulia, Subshift
from .weights import (
    ConstantWeight,
    FilterSquared,
    SymbolTable,
    TrigPolynomial,
    derive_delta,
)

_SCHEMA = {
    "scenario": {"name", "description"},
    "system": {"family", "degree", "transition", "c"},
    "weight": {"kind", "taps", "cos", "sin", "values", "value"},
    "delta": {"mode", "rescale"},
    "measure": {"kind", "size", "depth", "count", "burn_in", "seed"},
    "tests": {"family", "max_frequency", "max_depth", "max_total_degree"},
    "run": {"depths", "tolerance", "seed", "budget"},
}

BUNDLED = ("haar-circle", "stretched-haar", "golden-mean",
           "2-shift-weighted", "julia-c0")


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario document (sections as plain dicts)."""

    name: str
    description: str
    system: dict
    weight: dict
    delta: dict
    measure: dict
    tests: dict
    run: dict
    source: str = ""

    def as_dict(self) -> dict:
        return {
            "scenario": {"name": self.name, "description": self.description},
            "system": self.system,
            "weight": self.weight,
            "delta": self.delta,
            "measure": self.measure,
            "tests": self.tests,
            "run": self.run,
        }


def _require(section: dict, section_name: str, key: str):
    if key not in section:
        raise ConfigError(f"{section_name}.{key}", "required field is missing")
    return section[key]


def parse_config(data: dict, source: str = "") -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "scenario document must be a table")
    for section in data:
        if section not in _SCHEMA:
            raise ConfigError(section, "unknown section")
        if not isinstance(data[section], dict):
            raise ConfigError(section, "section must be a table")
        for key in data[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", "unknown field")
    for section in ("system", "weight", "delta", "measure", "tests", "run"):
        if section not in data:
            raise ConfigError(section, "required section is missing")
    meta = data.get("scenario", {})
    name = meta.get("name", os.path.splitext(os.path.basename(source))[0]
                    if source else "unnamed")
    return ScenarioConfig(
        name=str(name),
        description=str(meta.get("description", "")),
        system=dict(data["system"]),
        weight=dict(data["weight"]),
        delta=dict(data["delta"]),
        measure=dict(data["measure"]),
        tests=dict(data["tests"]),
        run=dict(data["run"]),
        source=source,
    )


def load_scenario(path_or_name: str) -> ScenarioConfig:
    """Load a scenario file, or one of the bundled scenarios by name."""
    if os.path.exists(path_or_name):
        raw = open(path_or_name, "rb").read()
        if path_or_name.endswith(".json"):
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ConfigError("<file>", f"invalid JSON: {e}") from e
        else:
            try:
                data = tomllib.loads(raw.decode("utf-8"))
            except tomllib.TOMLDecodeError as e:
                raise ConfigError("<file>", f"invalid TOML: {e}") from e
        return parse_config(data, source=path_or_name)
    from importlib import resources
    ref = resources.files("branchwalk") / "scenario_files" \
        / f"{path_or_name}.toml"
    if not ref.is_file():
        raise ConfigError("<file>",
                          f"no such file or bundled scenario: {path_or_name};"
                          f" bundled names: {', '.join(BUNDLED)}")
    data = tomllib.loads(ref.read_text(encoding="utf-8"))
    return parse_config(data, source=f"bundled:{path_or_name}")


# ---------------------------------------------------------------------------
# construction


def _build_system(cfg: ScenarioConfig):
    family = _require(cfg.system, "system", "family")
    if family == "circle":
        degree = _require(cfg.system, "system", "degree")
        if not isinstance(degree, int) or degree < 2:
            raise ConfigError("system.degree", "must be an integer >= 2")
        return CircleMap(degree)
    if family == "subshift":
        t = _require(cfg.system, "system", "transition")
        try:
            return Subshift(tuple(tuple(row) for row in t))
        except (ValueError, TypeError) as e:
            raise ConfigError("system.transition", str(e)) from e
    if family == "julia":
        c = _require(cfg.system, "system", "c")
        if not (isinstance(c, list) and len(c) == 2):
            raise ConfigError("system.c", "must be [re, im]")
        cv = complex(float(c[0]), float(c[1]))
        if abs(cv) > 4.0:
            raise ConfigError("system.c", "|c| <= 4 is the supported envelope")
        return QuadraticJulia(cv)
    raise ConfigError("system.family", f"unknown family {family!r}")


def _build_weight(cfg: ScenarioConfig, sys):
    kind = _require(cfg.weight, "weight", "kind")
    if kind == "filter":
        taps = _require(cfg.weight, "weight", "taps")
        return FilterSquared(tuple(float(t) for t in taps))
    if kind == "trig":
        cos = _require(cfg.weight, "weight", "cos")
        sin = cfg.weight.get("sin", [])
        return TrigPolynomial(tuple(float(v) for v in cos),
                              tuple(float(v) for v in sin))
    if kind == "symbols":
        values = _require(cfg.weight, "weight", "values")
        if not isinstance(sys, Subshift):
            raise ConfigError("weight.kind",
                              "symbol weights need a subshift system")
        if len(values) != sys.alphabet_size:
            raise ConfigError("weight.values",
                              f"need {sys.alphabet_size} entries")
        return SymbolTable(tuple(values))
    if kind == "constant":
        return ConstantWeight(float(cfg.weight.get("value", 1.0)))
    raise ConfigError("weight.kind", f"unknown kind {kind!r}")


def _build_tests(cfg: ScenarioConfig, sys):
    family = _require(cfg.tests, "tests", "family")
    if family == "trig-modes":
        cap = int(_require(cfg.tests, "tests", "max_frequency"))
        return trig_modes(cap)
    if family == "cylinders":
        if not isinstance(sys, Subshift):
            raise ConfigError("tests.family",
                              "cylinder tests need a subshift system")
        cap = int(_require(cfg.tests, "tests", "max_depth"))
        return cylinder_indicators(sys, cap)
    if family == "moments":
        cap = int(_require(cfg.tests, "tests", "max_total_degree"))
        return moment_functions(cap)
    raise ConfigError("tests.family", f"unknown family {family!r}")


def build_bundle(cfg: ScenarioConfig, *, seed: Optional[int] = None,
                 budget: Optional[int] = None,
                 tolerance: Optional[float] = None) -> ScenarioBundle:
    """Construct the runnable bundle; raises library errors on bad data.

    ``seed``/``budget``/``tolerance`` override the file's run block (the
    seed override also reseeds sampled measures).
    """
    sys = _build_system(cfg)
    weight = _build_weight(cfg, sys)

    mode = _require(cfg.delta, "delta", "mode")
    if mode not in ("strongly-invariant", "subshift-perron"):
        raise ConfigError("delta.mode", f"unknown mode {mode!r}")
    rescale = bool(cfg.delta.get("rescale", False))
    run_seed = int(cfg.run.get("seed", 0) if seed is None else seed)
    delta = derive_delta(sys, weight, mode, rescale=rescale, seed=run_seed)

    mkind = _require(cfg.measure, "measure", "kind")
    if mkind == "lebesgue-grid":
        if not isinstance(sys, CircleMap):
            raise ConfigError("measure.kind", "grid measure needs a circle")
        mu0 = GridDensity(int(_require(cfg.measure, "measure", "size")))
    elif mkind == "perron-cylinders":
        if not isinstance(sys, Subshift):
            raise ConfigError("measure.kind",
                              "cylinder measure needs a subshift")
        depth = int(_require(cfg.measure, "measure", "depth"))
        mu0 = perron_fixed_measure(sys, delta, depth=depth)
    elif mkind == "brolin-cloud":
        if not isinstance(sys, QuadraticJulia):
            raise ConfigError("measure.kind",
                              "sampled cloud needs a julia system")
        count = int(_require(cfg.measure, "measure", "count"))
        burn = int(cfg.measure.get("burn_in", 64))
        mseed = int(cfg.measure.get("seed", 0) if seed is None else seed)
        mu0 = brolin_sample(sys.c, count, mseed, burn_in=burn)
    else:
        raise ConfigError("measure.kind", f"unknown kind {mkind!r}")

    tests = _build_tests(cfg, sys)
    depths = cfg.run.get("depths", [0, 1, 2, 3])
    if not (isinstance(depths, list) and
            all(isinstance(n, int) and n >= 0 for n in depths)):
        raise ConfigError("run.depths", "must be a list of depths >= 0")
    tol = float(cfg.run.get("tolerance", 1e-8)
                if tolerance is None else tolerance)
    node_budget = int(cfg.run.get("budget", 1 << 24)
                      if budget is None else budget)

    return ScenarioBundle(
        name=cfg.name, sys=sys, weight=weight, delta=delta, mu0=mu0,
        tests=tests, tolerance=tol, depths=tuple(depths), seed=run_seed,
        budget=node_budget,
        meta={"weight": dict(cfg.weight), "delta_mode": mode,
              "rescale": rescale, "description": cfg.description},
    )
