"""Discretized finite measure spaces and L_p functions on them.

A :class:`MeasureSpace` is a fixed, ordered partition of Omega into cells of
positive measure.  A :class:`Func` holds one value per cell together with the
exponent p of the L_p space it is regarded in.  Cells are atoms: subsets are
unions of whole cells.

All norm computations go through :func:`lp_norms`, which reduces each row in
cell order.  Every other routine that reports a norm (estimators, witness
re-evaluation) calls the same kernel, so identical inputs give bit-identical
results.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgument

__all__ = [
    "MeasureSpace",
    "Func",
    "SubsetMask",
    "make_uniform_space",
    "lp_norm",
    "lp_norms",
    "project",
    "axpy",
    "pointwise_map",
    "zero_func",
    "constant_func",
]


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """Ordered finite partition of Omega with strictly positive cell measures."""

    measures: np.ndarray
    total_measure: float = field(init=False)

    def __post_init__(self):
        m = _frozen(self.measures)
        if m.ndim != 1 or m.size == 0:
            raise InvalidArgument("a measure space needs at least one cell")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise InvalidArgument("every cell measure must be finite and strictly positive")
        object.__setattr__(self, "measures", m)
        object.__setattr__(self, "total_measure", math.fsum(m))

    @property
    def cell_count(self) -> int:
        return self.measures.size

    @property
    def cells(self) -> range:
        return range(self.measures.size)

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.measures == self.measures[0]))

    @property
    def min_cell_measure(self) -> float:
        return float(self.measures.min())

    def same_as(self, other: "MeasureSpace") -> bool:
        return self is other or (
            self.cell_count == other.cell_count
            and np.array_equal(self.measures, other.measures)
        )

    def __repr__(self):
        return f"MeasureSpace(cells={self.cell_count}, total_measure={self.total_measure!r})"


def make_uniform_space(cell_count: int, total_measure: float = 1.0) -> MeasureSpace:
    """Split a space of measure `total_measure` into `cell_count` equal cells."""
    if isinstance(cell_count, bool) or int(cell_count) != cell_count or cell_count < 1:
        raise InvalidArgument(f"cell_count must be a positive integer, got {cell_count!r}")
    if not (total_measure > 0 and math.isfinite(total_measure)):
        raise InvalidArgument(f"total_measure must be positive and finite, got {total_measure!r}")
    cell_count = int(cell_count)
    return MeasureSpace(np.full(cell_count, total_measure / cell_count))


def _check_exponent(p):
    if not (isinstance(p, (int, float, np.floating, np.integer)) and math.isfinite(p) and p >= 1):
        raise InvalidArgument(f"L_p exponent must be a finite real >= 1, got {p!r}")
    return float(p)


def lp_power_sums(values: np.ndarray, measures: np.ndarray, p: float) -> np.ndarray:
    """Row-wise sum of |v|^p * mu over cells, accumulated in cell order."""
    v = np.abs(np.atleast_2d(values))
    if p == 1.0:
        w = v
    elif p == 2.0:
        w = v * v
    else:
        w = np.power(v, p)
    return np.sum(w * measures, axis=1)


def _root(s, p):
    if p == 1.0:
        return s
    if p == 2.0:
        return np.sqrt(s)
    return np.power(s, 1.0 / p)


def lp_norms(values: np.ndarray, measures: np.ndarray, p: float) -> np.ndarray:
    """L_p norms of each row of `values` (a 2-D array, one function per row)."""
    values = np.atleast_2d(values)
    with np.errstate(under="ignore", over="ignore"):
        out = _root(lp_power_sums(values, measures, p), p)
    # rows whose power sum left the float range are redone on a rescaled copy
    m = np.abs(values).max(axis=1) if values.shape[1] else np.zeros(len(values))
    bad = ((out == 0) & (m > 0)) | ~np.isfinite(out)
    if bad.any():
        mb = m[bad][:, None]
        out[bad] = m[bad] * _root(lp_power_sums(values[bad] / mb, measures, p), p)
    return out


@dataclass(frozen=True, eq=False)
class Func:
    """A function on a measure space, one real value per cell, viewed in L_p."""

    space: MeasureSpace
    values: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.space.cell_count,):
            raise InvalidArgument(
                f"expected {self.space.cell_count} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise InvalidArgument(f"non-finite function value at cell {bad}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "p", _check_exponent(self.p))

    def norm(self) -> float:
        return lp_norm(self)

    def with_exponent(self, p: float) -> "Func":
        return Func(self.space, self.values, p)

    def __add__(self, other: "Func") -> "Func":
        return axpy(1.0, other, self)

    def __sub__(self, other: "Func") -> "Func":
        return axpy(-1.0, other, self)

    def __neg__(self) -> "Func":
        return Func(self.space, -self.values, self.p)

    def __rmul__(self, a: float) -> "Func":
        return Func(self.space, a * self.values, self.p)

    def to_csv(self, path) -> None:
        """Write rows (cell_index, measure, value) with a header row."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cell_index", "measure", "value"])
            for i, (m, x) in enumerate(zip(self.space.measures, self.values)):
                w.writerow([i, format(m, ".17g"), format(x, ".17g")])

    @classmethod
    def from_csv(cls, path, p: float = 2.0) -> "Func":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        measures = [float(r["measure"]) for r in rows]
        values = [float(r["value"]) for r in rows]
        return cls(MeasureSpace(np.array(measures)), np.array(values), p)

    def __repr__(self):
        return f"Func(cells={self.values.size}, p={self.p}, norm={self.norm():.6g})"


@dataclass(frozen=True, eq=False)
class SubsetMask:
    """A measurable subset D made of whole cells."""

    space: MeasureSpace
    included: np.ndarray
    mass: float = field(init=False)

    def __post_init__(self):
        inc = _frozen(self.included, dtype=bool)
        if inc.shape != (self.space.cell_count,):
            raise InvalidArgument("mask length must equal the cell count")
        object.__setattr__(self, "included", inc)
        object.__setattr__(self, "mass", math.fsum(self.space.measures[inc]))

    @classmethod
    def from_cells(cls, space: MeasureSpace, cells) -> "SubsetMask":
        inc = np.zeros(space.cell_count, dtype=bool)
        inc[np.asarray(list(cells), dtype=int)] = True
        return cls(space, inc)

    @classmethod
    def full(cls, space):
        return cls(space, np.ones(space.cell_count, dtype=bool))

    @classmethod
    def empty(cls, space):
        return cls(space, np.zeros(space.cell_count, dtype=bool))

    def cells(self) -> list[int]:
        return np.flatnonzero(self.included).tolist()

    def __or__(self, other: "SubsetMask") -> "SubsetMask":
        _same_space(self.space, other.space)
        return SubsetMask(self.space, self.included | other.included)


def _same_space(a: MeasureSpace, b: MeasureSpace):
    if not a.same_as(b):
        raise InvalidArgument("operands live on different measure spaces")


def lp_norm(f: Func) -> float:
    return float(lp_norms(f.values[None, :], f.space.measures, f.p)[0])


def project(f: Func, D: SubsetMask) -> Func:
    """Restriction by indicator: keep f on D, zero elsewhere."""
    _same_space(f.space, D.space)
    return Func(f.space, np.where(D.included, f.values, 0.0), f.p)


def axpy(a: float, f: Func, g: Func) -> Func:
    """Cellwise a*f + g."""
    _same_space(f.space, g.space)
    if f.p != g.p:
        raise InvalidArgument(f"exponent mismatch: {f.p} vs {g.p}")
    if a == 0:
        return Func(g.space, g.values, g.p)
    return Func(g.space, a * f.values + g.values, g.p)


def pointwise_map(f: Func, fn: Callable[[np.ndarray], np.ndarray]) -> Func:
    return Func(f.space, np.asarray(fn(f.values), dtype=float), f.p)


def zero_func(space: MeasureSpace, p: float = 2.0) -> Func:
    return Func(space, np.zeros(space.cell_count), p)


def constant_func(space: MeasureSpace, c: float, p: float = 2.0) -> Func:
    return Func(space, np.full(space.cell_count, float(c)), p)
