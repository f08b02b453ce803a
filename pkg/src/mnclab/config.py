"""Experiment configuration files.

A configuration is a TOML document::

    [space]
    cell_count = 1024
    total_measure = 1.0

    [tolerances]            # optional
    zero_factor = 1e-6
    rate_tol = 1e-3

    [generators.ball]       # named sample sets
    kind = "ball-mixture"
    p = 2.0
    radius = 1.0
    count = 64
    seed = 0

    [operators.F1]          # named operators, same keys as operator_from_dict
    kind = "f1"
    a = 1.0
    q = 2.0
    p = 2.0

    [[tasks]]
    name = "F1-degree"
    kind = "degree"
    operator = "F1"
    set = "ball"
    estimator = { kind = "nu", delta = 0.0009765625, peak = 8.0 }
    rho = { base = 2.0, start = -3, stop = 3 }

Grids are lists of numbers or ``{base, start, stop}`` tables meaning
``base**k`` for integer k from start to stop inclusive.  Generators may name
other generators in ``base`` (a list) and, for ``kind = "image"``, an
operator in ``operator``.  Operators may name other operators in
``children``.

:func:`load_config` parses and validates without building anything;
:func:`Resolver` builds the referenced objects lazily.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, MnclabError
from .estimators import Estimator
from .operators import OperatorSpec, operator_from_dict
from .sets import GeneratorSpec, SampleSet, build
from .space import Func, MeasureSpace, make_uniform_space

RANDOM_KINDS = {"ball-mixture", "sphere", "annulus", "smooth-random"}
GENERATOR_KINDS = RANDOM_KINDS | {"spike", "indicator", "explicit", "singleton", "scaled", "translated",
                                  "union", "minkowski-sum", "image"}

# task kind -> (operator-valued keys, generator-valued keys, required keys)
TASK_KINDS: dict[str, tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]] = {
    "estimate": ((), ("set",), ("set", "estimators")),
    "scaling": ((), ("sets",), ("sets", "estimators", "factors")),
    "oracle": ((), (), ("trials", "max_size", "seed")),
    "nu_profile": (("operator",), ("set",), ("set",)),
    "degree": (("operator",), ("set",), ("operator", "set", "estimator", "rho")),
    "spherical": (("operator",), (), ("operator", "estimator", "rho1", "rho0", "samples")),
    "lemma1": (("operator",), (), ("operator", "estimator", "rho1", "rho", "samples")),
    "condensing_rate": (("operator",), (), ("operator", "mode", "estimator", "radii", "samples")),
    "theorem1": (("A1", "A0"), (), ("A1", "A0", "anchor", "estimator", "radii", "sphere_grid", "samples")),
    "improving": (("operator",), ("suite",), ("operator", "suite")),
    "comparability": (("F", "F1"), ("set",), ("F", "F1", "set", "delta")),
    "contrast": (("operator",), ("set",), ("operator", "set", "budgets")),
    "contrast_order": (("operators",), ("set",), ("operators", "set", "budgets")),
    "frechet": (("operator", "linear"), ("contrast_set",),
                ("operator", "anchor", "radii", "budgets", "samples", "contrast_set")),
}

DEFAULT_TOLERANCES = {"zero_factor": 1e-6, "rate_tol": 1e-3}


@dataclass
class ExperimentConfig:
    raw: dict
    source: str

    @property
    def space(self) -> dict:
        return self.raw["space"]

    @property
    def tolerances(self) -> dict:
        return {**DEFAULT_TOLERANCES, **self.raw.get("tolerances", {})}

    @property
    def generators(self) -> dict:
        return self.raw.get("generators", {})

    @property
    def operators(self) -> dict:
        return self.raw.get("operators", {})

    @property
    def tasks(self) -> list:
        return self.raw.get("tasks", [])

    def echo(self) -> dict:
        return copy.deepcopy(self.raw)


def parse_grid(g, what="grid") -> list[float]:
    if isinstance(g, Mapping):
        try:
            base, start, stop = float(g["base"]), int(g["start"]), int(g["stop"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{what}: a grid table needs numeric base, start and stop") from exc
        step = 1 if stop >= start else -1
        return [base**k for k in range(start, stop + step, step)]
    if isinstance(g, (list, tuple)) and g and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in g):
        return [float(x) for x in g]
    raise ConfigError(f"{what}: expected a non-empty list of numbers or a {{base, start, stop}} table")


def _ordered(xs, increasing: bool) -> bool:
    pairs = list(zip(xs, xs[1:]))
    return all(b > a for a, b in pairs) if increasing else all(b < a for a, b in pairs)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, str(path))


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    cfg = ExperimentConfig(raw, source)
    validate(cfg)
    return cfg


def _seeds(raw) -> list:
    """Every seed-bearing table in the config (generators, samples, tasks)."""
    out = list(raw.get("generators", {}).values())
    for t in raw.get("tasks", []):
        out.append(t)
        if isinstance(t.get("samples"), Mapping):
            out.append(t["samples"])
    return [d for d in out if isinstance(d, dict) and "seed" in d]


def override_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    raw = copy.deepcopy(cfg.raw)
    for d in _seeds(raw):
        d["seed"] = int(seed)
    out = ExperimentConfig(raw, cfg.source)
    validate(out)
    return out


def validate(cfg: ExperimentConfig) -> None:
    """Check structure, references, seeds and grids; raise ConfigError on the first problem."""
    raw = cfg.raw
    sp = raw.get("space")
    if not isinstance(sp, Mapping) or "cell_count" not in sp:
        raise ConfigError("missing [space] block with cell_count")
    n = sp["cell_count"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError(f"space.cell_count must be a positive integer, got {n!r}")
    tm = sp.get("total_measure", 1.0)
    if not isinstance(tm, (int, float)) or not (tm > 0 and math.isfinite(tm)):
        raise ConfigError(f"space.total_measure must be positive, got {tm!r}")
    for k, v in raw.get("tolerances", {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}")
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerance {k} must be positive")

    gens, ops = cfg.generators, cfg.operators
    for name, g in gens.items():
        kind = g.get("kind")
        if kind not in GENERATOR_KINDS:
            raise ConfigError(f"generator {name!r}: unknown kind {kind!r}")
        if kind in RANDOM_KINDS and not isinstance(g.get("seed"), int):
            raise ConfigError(f"generator {name!r}: random generators need an explicit integer seed")
        for b in g.get("base", []):
            if b not in gens:
                raise ConfigError(f"generator {name!r}: unknown base generator {b!r}")
        if kind == "image" and g.get("operator") not in ops:
            raise ConfigError(f"generator {name!r}: unknown operator {g.get('operator')!r}")
    _acyclic(gens, lambda g: g.get("base", []), "generator")
    for name, o in ops.items():
        if "kind" not in o:
            raise ConfigError(f"operator {name!r}: missing kind")
        for c in o.get("children", []):
            if isinstance(c, str) and c not in ops:
                raise ConfigError(f"operator {name!r}: unknown child operator {c!r}")
    _acyclic(ops, lambda o: [c for c in o.get("children", []) if isinstance(c, str)], "operator")

    seen = set()
    tasks = cfg.tasks
    if not isinstance(tasks, list):
        raise ConfigError("tasks must be an array of tables ([[tasks]])")
    for i, t in enumerate(tasks):
        name = t.get("name")
        where = f"task {i} ({name!r})"
        if not isinstance(name, str) or not name:
            raise ConfigError(f"task {i}: missing name")
        if name in seen:
            raise ConfigError(f"{where}: duplicate task name")
        seen.add(name)
        kind = t.get("kind")
        if kind not in TASK_KINDS:
            raise ConfigError(f"{where}: unknown task kind {kind!r}")
        op_keys, gen_keys, required = TASK_KINDS[kind]
        for k in required:
            if k not in t:
                raise ConfigError(f"{where}: missing key {k!r}")
        for k in op_keys:
            if k not in t:
                continue
            for r in t[k] if isinstance(t[k], list) else [t[k]]:
                if r not in ops:
                    raise ConfigError(f"{where}: unknown operator {r!r} in {k!r}")
        for k in gen_keys:
            if k not in t:
                continue
            refs = t[k] if isinstance(t[k], list) else [t[k]]
            for r in refs:
                if r not in gens:
                    raise ConfigError(f"{where}: unknown generator {r!r} in {k!r}")
        if "samples" in t:
            s = t["samples"]
            if not isinstance(s, Mapping) or not isinstance(s.get("seed"), int):
                raise ConfigError(f"{where}: samples need an explicit integer seed")
        rs = t.get("resample_seed")
        if rs is not None and (isinstance(rs, bool) or not isinstance(rs, int)):
            raise ConfigError(f"{where}: resample_seed must be an integer")
        for k in ("estimator",):
            if k in t:
                _check_estimator(t[k], where)
        for k in ("estimators",):
            if k in t:
                for e in t[k]:
                    _check_estimator(e, where)
        _check_task_grids(t, where)


def _check_estimator(e, where):
    try:
        Estimator.from_dict(e)
    except (MnclabError, KeyError, TypeError) as exc:
        raise ConfigError(f"{where}: bad estimator {e!r}: {exc}") from exc


def _check_task_grids(t, where):
    kind = t["kind"]

    def grid(key, increasing=None):
        g = parse_grid(t[key], f"{where}.{key}")
        if any(not (x > 0 and math.isfinite(x)) for x in g):
            raise ConfigError(f"{where}.{key}: grid values must be positive")
        if increasing is not None and not _ordered(g, increasing):
            raise ConfigError(f"{where}.{key}: grid must be strictly {'increasing' if increasing else 'decreasing'}")
        return g

    if kind == "degree":
        if len(grid("rho", True)) < 3:
            raise ConfigError(f"{where}.rho: at least 3 points")
    elif kind == "spherical":
        g = grid("rho0")
        if any(r > t["rho1"] for r in g):
            raise ConfigError(f"{where}.rho0: values must lie in (0, rho1]")
    elif kind == "lemma1":
        grid("rho")
    elif kind == "condensing_rate":
        mode = t["mode"]
        if mode not in ("balls-at-point", "spheres-at-point", "annuli-at-infinity", "spheres-at-infinity"):
            raise ConfigError(f"{where}: unknown mode {mode!r}")
        grid("radii", increasing=mode.endswith("infinity"))
    elif kind == "theorem1":
        grid("radii", increasing=t["anchor"] == "infinity")
        grid("sphere_grid")
    elif kind == "frechet":
        grid("radii")
    elif kind == "scaling":
        grid("factors")
    elif kind in ("nu_profile", "improving") and "deltas" in t:
        grid("deltas", increasing=False)
    if kind in ("contrast", "contrast_order", "frechet"):
        b = t["budgets"]
        if not (isinstance(b, list) and b and all(isinstance(x, int) and x >= 1 for x in b)):
            raise ConfigError(f"{where}.budgets: expected positive integers")


def _acyclic(table: Mapping, deps, what):
    state: dict[str, int] = {}

    def visit(n):
        if state.get(n) == 1:
            raise ConfigError(f"{what} {n!r} refers to itself")
        if state.get(n) == 2:
            return
        state[n] = 1
        for d in deps(table[n]):
            visit(d)
        state[n] = 2

    for n in table:
        visit(n)


# -- building -------------------------------------------------------------


class Resolver:
    """Builds the space, named operators and named samples of a config, with caching."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        sp = cfg.space
        self.space: MeasureSpace = make_uniform_space(sp["cell_count"], float(sp.get("total_measure", 1.0)))
        self._ops: dict[str, OperatorSpec] = {}
        self._sets: dict[str, SampleSet] = {}

    def operator(self, name: str) -> OperatorSpec:
        if name not in self._ops:
            d = self.cfg.operators[name]
            self._ops[name] = operator_from_dict(d, self.space, self.operator)
        return self._ops[name]

    def generator_spec(self, name: str) -> GeneratorSpec:
        g = dict(self.cfg.generators[name])
        kind = g.pop("kind")
        base = tuple(self.generator_spec(b) for b in g.pop("base", []))
        if kind == "image":
            g["operator"] = self.operator(g["operator"]).to_dict()
        return GeneratorSpec(kind, g, base)

    def sample(self, name: str) -> SampleSet:
        if name not in self._sets:
            self._sets[name] = build(self.generator_spec(name), self.space)
        return self._sets[name]

    def func(self, v, p: float) -> Func | str:
        """Anchors and fixed functions: "zero", "infinity", a constant or a value list."""
        if v == "infinity":
            return "infinity"
        if v == "zero":
            v = 0.0
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return Func(self.space, [float(v)] * self.space.cell_count, p)
        return Func(self.space, v, p)

    def check_buildable(self) -> None:
        """Build every named operator and sample; turn failures into ConfigError."""
        for kind, names, fn in (("operator", self.cfg.operators, self.operator), ("generator", self.cfg.generators, self.sample)):
            for n in names:
                try:
                    fn(n)
                except ConfigError:
                    raise
                except (MnclabError, KeyError, TypeError, ValueError) as exc:
                    raise ConfigError(f"{kind} {n!r}: {exc}") from exc
