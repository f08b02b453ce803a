"""Seeded finite samples standing in for bounded subsets of L_p.

Every sample carries a :class:`GeneratorSpec` describing how it was built;
``build(spec, space)`` regenerates it byte for byte.

Randomness comes from numpy's PCG64 bit generator (``Generator(PCG64(seed))``)
and only ``Generator.random`` is used, whose stream is fixed across numpy
versions and platforms.

Ball, sphere and annulus samples are drawn at unit scale and multiplied by the
radius as the last step, so ``ball_sample(..., rho)`` equals
``scale_set(ball_sample(..., 1), rho)`` exactly.  When the mixture contains
spikes, member 0 is always the narrowest spike at the largest admissible norm;
this pins ``nu_hat(B_rho) = nu_hat(S_rho) = rho * nu_hat(S_1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidArgument
from .space import Func, MeasureSpace, lp_norms

__all__ = [
    "GeneratorSpec",
    "SampleSet",
    "DEFAULT_MIXTURE",
    "build",
    "spike_family",
    "disjoint_indicator_family",
    "ball_sample",
    "sphere_sample",
    "annulus_sample",
    "smooth_family",
    "explicit_set",
    "scale_set",
    "translate_set",
    "union_sets",
    "sum_sets",
]

DEFAULT_MIXTURE = {"spike": 0.5, "smooth": 0.25, "uniform": 0.25}
_MIXTURE_KEYS = ("spike", "smooth", "uniform")
_SMOOTH_MODES = 5

KINDS = (
    "spike",
    "indicator",
    "smooth-random",
    "ball-mixture",
    "sphere",
    "annulus",
    "singleton",
    "explicit",
    "union",
    "scaled",
    "translated",
    "minkowski-sum",
    "image",
)


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Recipe for a sample: generator kind, its parameters, nested bases."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    base: tuple["GeneratorSpec", ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "base", tuple(self.base))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "params": _plain(self.params)}
        if self.base:
            d["base"] = [b.to_dict() for b in self.base]
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "GeneratorSpec":
        return cls(d["kind"], d.get("params", {}), tuple(cls.from_dict(b) for b in d.get("base", ())))

    def __eq__(self, other):
        return isinstance(other, GeneratorSpec) and self.to_dict() == other.to_dict()


def _plain(obj):
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


@dataclass(frozen=True, eq=False)
class SampleSet:
    """A finite family of functions on one space, all in the same L_p."""

    space: MeasureSpace
    p: float
    values: np.ndarray
    provenance: GeneratorSpec

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[1] != self.space.cell_count:
            raise InvalidArgument(f"member array has shape {v.shape}, expected (n, {self.space.cell_count})")
        if v.shape[0] == 0:
            raise InvalidArgument("a sample set must have at least one member")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("sample members must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "p", float(self.p))

    def __len__(self):
        return self.values.shape[0]

    def member(self, i: int) -> Func:
        return Func(self.space, self.values[i], self.p)

    @property
    def members(self) -> list[Func]:
        return [self.member(i) for i in range(len(self))]

    def norms(self) -> np.ndarray:
        return lp_norms(self.values, self.space.measures, self.p)

    def with_values(self, values, provenance: GeneratorSpec, p: float | None = None) -> "SampleSet":
        return SampleSet(self.space, self.p if p is None else p, values, provenance)

    def identical_to(self, other: "SampleSet") -> bool:
        return (
            self.space.same_as(other.space)
            and self.p == other.p
            and self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
        )


# -- helpers -------------------------------------------------------------


def _rng(seed):
    if seed is None or isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise InvalidArgument(f"an explicit non-negative integer seed is required, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _check_count(count, what="count"):
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise InvalidArgument(f"{what} must be a positive integer, got {count!r}")
    return int(count)


def _check_radius(r, what="radius"):
    if not (isinstance(r, (int, float, np.floating, np.integer)) and math.isfinite(r) and r > 0):
        raise InvalidArgument(f"{what} must be a positive real, got {r!r}")
    return float(r)


def _spike_blocks(space: MeasureSpace) -> list[int]:
    """Block sizes (in cells) of the spike schedule, widest first: n/2, n/4, ..."""
    if not space.is_uniform:
        raise InvalidArgument("spike schedules need a uniform space")
    n = space.cell_count
    blocks = []
    b = n
    while b % 2 == 0:
        b //= 2
        blocks.append(b)
    return blocks


def _spike(space: MeasureSpace, p: float, block: int, start: int = 0) -> np.ndarray:
    """Unit-norm spike: constant on `block` cells beginning at `start`."""
    h = space.measures[0]
    v = np.zeros(space.cell_count)
    v[start : start + block] = (block * h) ** (-1.0 / p)
    return v


def _norm(v, space, p):
    return float(lp_norms(v[None, :], space.measures, p)[0])


def _unit(v, space, p):
    n = _norm(v, space, p)
    if n == 0:
        return None
    return v / n


def _smooth_shape(rng, space):
    n = space.cell_count
    x = (np.arange(n) + 0.5) / n
    coef = (2.0 * rng.random(_SMOOTH_MODES) - 1.0) / np.arange(1, _SMOOTH_MODES + 1)
    out = np.zeros(n)
    for k, c in enumerate(coef):
        out += c * np.cos(math.pi * k * x)
    return out


def _uniform_shape(rng, space):
    return 2.0 * rng.random(space.cell_count) - 1.0


def _mixture_counts(mixture, count) -> dict[str, int]:
    if mixture is None:
        mixture = DEFAULT_MIXTURE
    if isinstance(mixture, str):
        if mixture not in _MIXTURE_KEYS:
            raise InvalidArgument(f"unknown mixture component {mixture!r}")
        mixture = {mixture: 1.0}
    elif not isinstance(mixture, Mapping):
        mixture = list(mixture)
        if len(mixture) != 3:
            raise InvalidArgument("mixture needs three weights (spike, smooth, uniform)")
        mixture = dict(zip(_MIXTURE_KEYS, mixture))
    unknown = set(mixture) - set(_MIXTURE_KEYS)
    if unknown:
        raise InvalidArgument(f"unknown mixture components {sorted(unknown)}")
    w = np.array([float(mixture.get(k, 0.0)) for k in _MIXTURE_KEYS])
    if not np.all(np.isfinite(w)) or np.any(w < 0) or w.sum() <= 0:
        raise InvalidArgument(f"invalid mixture weights {dict(mixture)!r}")
    share = w / w.sum() * count
    n = np.floor(share).astype(int)
    frac = share - n
    for i in np.argsort(-frac, kind="stable")[: count - n.sum()]:
        n[i] += 1
    if w[0] > 0 and n[0] == 0:
        n[int(np.argmax(n))] -= 1
        n[0] = 1
    return dict(zip(_MIXTURE_KEYS, n.tolist()))


def _mixture_dict(mixture):
    counts_probe = _mixture_counts(mixture, 1)  # validates
    del counts_probe
    if mixture is None:
        return dict(DEFAULT_MIXTURE)
    if isinstance(mixture, str):
        return {mixture: 1.0}
    if isinstance(mixture, Mapping):
        return {k: float(v) for k, v in mixture.items()}
    return dict(zip(_MIXTURE_KEYS, map(float, mixture)))


def _draw_directions(space, p, count, rng, mixture):
    """Unit-norm members, spikes first (narrowest anchor at index 0)."""
    counts = _mixture_counts(mixture, count)
    rows = []
    if counts["spike"]:
        blocks = _spike_blocks(space)
        if not blocks:
            raise InvalidArgument("the grid admits no spikes (cell count is odd)")
        narrow_first = blocks[::-1]
        for j in range(counts["spike"]):
            b = narrow_first[j % len(narrow_first)]
            if j == 0:
                start = 0
            else:
                start = b * int(rng.random() * (space.cell_count // b))
            rows.append(_spike(space, p, b, start))
    for kind, draw in (("smooth", _smooth_shape), ("uniform", _uniform_shape)):
        for _ in range(counts[kind]):
            for _attempt in range(100):
                d = _unit(draw(rng, space), space, p)
                if d is not None:
                    break
            else:
                raise InvalidArgument("every draw was the zero function")
            rows.append(d)
    return np.array(rows), counts


def _into_shell(v, space, p, lo, hi):
    """Nudge v so that lo < ||v|| <= hi (lo may be 0 for balls)."""
    for _ in range(64):
        n = _norm(v, space, p)
        if n > hi:
            v = v * (hi / n) if n > hi * (1 + 1e-15) else v * (1 - 2.0**-52)
        elif n <= lo:
            v = v * (1 + 2.0**-52) if n > 0 else v
        else:
            return v
    return v


# -- generators ----------------------------------------------------------


def spike_family(space: MeasureSpace, p: float, count: int) -> SampleSet:
    """Unit-norm spikes on blocks of measure 1/2, 1/4, ... of the total, from cell 0."""
    count = _check_count(count)
    blocks = _spike_blocks(space)
    if count > len(blocks):
        raise InvalidArgument(f"a {space.cell_count}-cell grid supports at most {len(blocks)} spikes, asked for {count}")
    vals = np.array([_spike(space, p, b) for b in blocks[:count]])
    return SampleSet(space, p, vals, GeneratorSpec("spike", {"p": p, "count": count}))


def disjoint_indicator_family(space: MeasureSpace, p: float, count: int) -> SampleSet:
    """Member i is mu_i^(-1/p) on cell i: unit norms, pairwise distance 2^(1/p)."""
    count = _check_count(count)
    if count > space.cell_count:
        raise InvalidArgument(f"count {count} exceeds cell count {space.cell_count}")
    vals = np.zeros((count, space.cell_count))
    idx = np.arange(count)
    vals[idx, idx] = space.measures[:count] ** (-1.0 / p)
    return SampleSet(space, p, vals, GeneratorSpec("indicator", {"p": p, "count": count}))


def ball_sample(space, p, radius, count, seed, mixture=None) -> SampleSet:
    """Members with norms in (0, radius]; member 0 is a full-norm spike when spikes are mixed in."""
    radius = _check_radius(radius)
    count = _check_count(count)
    mix = _mixture_dict(mixture)
    rng = _rng(seed)
    dirs, counts = _draw_directions(space, p, count, rng, mix)
    t = 1.0 - rng.random(count)
    if counts["spike"]:
        t[0] = 1.0
    unit = np.array([_into_shell(d * ti, space, p, 0.0, 1.0) for d, ti in zip(dirs, t)])
    vals = unit * radius
    spec = GeneratorSpec("ball-mixture", {"p": p, "radius": radius, "count": count, "seed": int(seed), "mixture": mix})
    return SampleSet(space, p, vals, spec)


def sphere_sample(space, p, radius, count, seed, mixture=None) -> SampleSet:
    """Members of norm exactly `radius` (to rounding)."""
    radius = _check_radius(radius)
    count = _check_count(count)
    mix = _mixture_dict(mixture)
    rng = _rng(seed)
    dirs, _ = _draw_directions(space, p, count, rng, mix)
    vals = dirs * radius
    spec = GeneratorSpec("sphere", {"p": p, "radius": radius, "count": count, "seed": int(seed), "mixture": mix})
    return SampleSet(space, p, vals, spec)


def annulus_sample(space, p, r_inner, r_outer, count, seed, mixture=None) -> SampleSet:
    """Members with r_inner < norm <= r_outer; the spike anchor sits at r_outer."""
    r_inner = _check_radius(r_inner, "inner radius")
    r_outer = _check_radius(r_outer, "outer radius")
    if not r_inner < r_outer:
        raise InvalidArgument(f"annulus needs R1 < R2, got ({r_inner}, {r_outer})")
    count = _check_count(count)
    mix = _mixture_dict(mixture)
    rng = _rng(seed)
    dirs, counts = _draw_directions(space, p, count, rng, mix)
    t = r_outer - (r_outer - r_inner) * rng.random(count)
    if counts["spike"]:
        t[0] = r_outer
    vals = np.array([_into_shell(d * ti, space, p, r_inner, r_outer) for d, ti in zip(dirs, t)])
    spec = GeneratorSpec(
        "annulus",
        {"p": p, "r_inner": r_inner, "r_outer": r_outer, "count": count, "seed": int(seed), "mixture": mix},
    )
    return SampleSet(space, p, vals, spec)


def smooth_family(space, p, radius, count, seed) -> SampleSet:
    """Low-frequency cosine sums with norms in (0, radius]: an equi-integrable family."""
    radius = _check_radius(radius)
    count = _check_count(count)
    rng = _rng(seed)
    dirs, _ = _draw_directions(space, p, count, rng, {"smooth": 1.0})
    t = 1.0 - rng.random(count)
    unit = np.array([_into_shell(d * ti, space, p, 0.0, 1.0) for d, ti in zip(dirs, t)])
    spec = GeneratorSpec("smooth-random", {"p": p, "radius": radius, "count": count, "seed": int(seed)})
    return SampleSet(space, p, unit * radius, spec)


def explicit_set(space: MeasureSpace, p: float, rows: Iterable[Sequence[float]] | np.ndarray) -> SampleSet:
    """A set given member by member (e.g. a handful of constant functions)."""
    vals = np.array(rows, dtype=float)
    if vals.ndim == 1:
        vals = vals[None, :]
    kind = "singleton" if vals.shape[0] == 1 else "explicit"
    return SampleSet(space, p, vals, GeneratorSpec(kind, {"p": p, "values": vals.tolist()}))


def constant_set(space: MeasureSpace, p: float, constants: Iterable[float]) -> SampleSet:
    consts = [float(c) for c in constants]
    vals = np.repeat(np.array(consts)[:, None], space.cell_count, axis=1)
    kind = "singleton" if len(consts) == 1 else "explicit"
    return SampleSet(space, p, vals, GeneratorSpec(kind, {"p": p, "constants": consts}))


# -- set algebra ---------------------------------------------------------


def _compatible(U: SampleSet, V: SampleSet):
    if not U.space.same_as(V.space):
        raise InvalidArgument("sample sets live on different spaces")
    if U.p != V.p:
        raise InvalidArgument(f"exponent mismatch: {U.p} vs {V.p}")


def scale_set(U: SampleSet, factor: float) -> SampleSet:
    """Memberwise multiplication by `factor`."""
    if factor == 1:
        return U
    return U.with_values(U.values * factor, GeneratorSpec("scaled", {"factor": float(factor)}, (U.provenance,)))


def translate_set(U: SampleSet, shift: Func) -> SampleSet:
    """Memberwise translation u + shift."""
    if not U.space.same_as(shift.space):
        raise InvalidArgument("shift lives on a different space")
    spec = GeneratorSpec("translated", {"shift": shift.values.tolist()}, (U.provenance,))
    return U.with_values(U.values + shift.values, spec)


def union_sets(U: SampleSet, V: SampleSet) -> SampleSet:
    _compatible(U, V)
    return U.with_values(np.vstack([U.values, V.values]), GeneratorSpec("union", {}, (U.provenance, V.provenance)))


def sum_sets(U: SampleSet, V: SampleSet) -> SampleSet:
    """All pairwise sums u + v, ordered with the U index outermost."""
    _compatible(U, V)
    vals = (U.values[:, None, :] + V.values[None, :, :]).reshape(-1, U.space.cell_count)
    return U.with_values(vals, GeneratorSpec("minkowski-sum", {}, (U.provenance, V.provenance)))


# -- regeneration --------------------------------------------------------


def build(spec: GeneratorSpec | Mapping, space: MeasureSpace) -> SampleSet:
    """Regenerate the sample described by `spec` on `space`."""
    if isinstance(spec, Mapping):
        spec = GeneratorSpec.from_dict(spec)
    k, a = spec.kind, spec.params
    p = a.get("p", 2.0)
    if k == "spike":
        return spike_family(space, p, a["count"])
    if k == "indicator":
        return disjoint_indicator_family(space, p, a["count"])
    if k == "ball-mixture":
        return ball_sample(space, p, a.get("radius", 1.0), a["count"], a["seed"], a.get("mixture"))
    if k == "sphere":
        return sphere_sample(space, p, a.get("radius", 1.0), a["count"], a["seed"], a.get("mixture"))
    if k == "annulus":
        return annulus_sample(space, p, a["r_inner"], a["r_outer"], a["count"], a["seed"], a.get("mixture"))
    if k == "smooth-random":
        return smooth_family(space, p, a.get("radius", 1.0), a["count"], a["seed"])
    if k in ("singleton", "explicit"):
        if "constants" in a:
            return constant_set(space, p, a["constants"])
        return explicit_set(space, p, a["values"])
    bases = [build(b, space) for b in spec.base]
    if k == "scaled":
        return scale_set(bases[0], a["factor"])
    if k == "translated":
        return translate_set(bases[0], Func(space, np.array(a["shift"]), bases[0].p))
    if k == "union":
        return union_sets(bases[0], bases[1])
    if k == "minkowski-sum":
        return sum_sets(bases[0], bases[1])
    if k == "image":
        from .operators import apply_set, operator_from_dict

        return apply_set(operator_from_dict(a["operator"], space), bases[0])
    raise InvalidArgument(f"cannot build generator kind {k!r}")
