"""Finite-sample estimators of the diameter and of the chi, beta and nu MNCs.

Every estimator returns an :class:`MncEstimate` carrying a witness from
which the value can be recomputed (:func:`verify_witness`).

* ``diameter``   max pairwise L_p distance.
* ``chi_hat``    covering radius of a greedy farthest-point N-net whose
  centres are sample members (discrete k-center).  Within a factor 2 of the
  best discrete net, see :func:`chi_oracle`.
* ``beta_hat``   min pairwise distance of M members picked by greedy max-min
  dispersion, starting from the diameter pair.  At least half the optimum,
  see :func:`beta_oracle`.
* ``nu_hat``     largest ``||P_D u||`` over members u and unions D of whole
  cells with mu(D) <= delta.  With equal cell measures, taking cells by
  decreasing |u| is the exact discrete optimum.

Selections break ties toward the lowest index.  Two candidates whose scores
agree to a relative 1e-12 count as tied, which keeps witnesses identical
under memberwise scaling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import InvalidArgument, SizeCapExceeded
from .sets import SampleSet
from .space import Func, SubsetMask, lp_norms

__all__ = [
    "MncEstimate",
    "NuProfile",
    "Estimator",
    "pairwise_distances",
    "diameter",
    "chi_hat",
    "chi_oracle",
    "beta_hat",
    "beta_or_zero",
    "beta_oracle",
    "nu_hat",
    "nu_profile",
    "default_delta_grid",
    "verify_witness",
    "max_projection_norm",
    "ORACLE_CAP",
    "TIE_RTOL",
    "NU_PEAK_DEFAULT",
]

ORACLE_CAP = 14
TIE_RTOL = 1e-12
NU_PEAK_DEFAULT = 8.0
_MASS_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class MncEstimate:
    kind: str
    budget: Any
    value: float
    witness: Any
    sample_size: int

    def to_dict(self) -> dict:
        if self.kind == "nu":
            member, mask = self.witness
            w = {"member": int(member), "cells": mask.cells(), "mass": mask.mass}
        else:
            w = [int(i) for i in self.witness]
        return {
            "kind": self.kind,
            "budget": self.budget,
            "value": float(self.value),
            "witness": w,
            "sample_size": self.sample_size,
        }


def _first_max(scores: np.ndarray) -> int:
    """Lowest index whose score is within TIE_RTOL of the maximum."""
    top = scores.max()
    if top > 0:
        hits = np.flatnonzero(scores >= top * (1 - TIE_RTOL))
    else:
        hits = np.flatnonzero(scores == top)
    return int(hits[0])


def pairwise_distances(U: SampleSet) -> np.ndarray:
    """Symmetric matrix of L_p distances between members."""
    v = U.values
    n = len(U)
    d = np.zeros((n, n))
    for i in range(n - 1):
        row = lp_norms(v[i] - v[i + 1 :], U.space.measures, U.p)
        d[i, i + 1 :] = row
        d[i + 1 :, i] = row
    return d


def _distances_to(U: SampleSet, idx: int) -> np.ndarray:
    return lp_norms(U.values[idx] - U.values, U.space.measures, U.p)


# -- diameter ------------------------------------------------------------


def diameter(U: SampleSet, distances: np.ndarray | None = None) -> MncEstimate:
    n = len(U)
    if n == 1:
        return MncEstimate("diameter", None, 0.0, (0, 0), 1)
    d = pairwise_distances(U) if distances is None else distances
    iu, ju = np.triu_indices(n, k=1)
    k = _first_max(d[iu, ju])
    i, j = int(iu[k]), int(ju[k])
    return MncEstimate("diameter", None, float(d[i, j]), (i, j), n)


# -- chi -----------------------------------------------------------------


def _check_budget(N, name):
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise InvalidArgument(f"{name} must be a positive integer, got {N!r}")
    return int(N)


def chi_hat(U: SampleSet, N: int, distances: np.ndarray | None = None) -> MncEstimate:
    """Greedy farthest-point N-net seeded at member 0."""
    N = _check_budget(N, "net size N")
    n = len(U)
    if N >= n:
        return MncEstimate("chi", N, 0.0, tuple(range(n)), n)
    d = pairwise_distances(U) if distances is None else distances
    centres = [0]
    reach = d[0].copy()
    for _ in range(N - 1):
        if reach.max() == 0:
            break
        j = _first_max(reach)
        centres.append(j)
        reach = np.minimum(reach, d[j])
    return MncEstimate("chi", N, float(reach.max()), tuple(centres), n)


def chi_oracle(U: SampleSet, N: int, distances: np.ndarray | None = None) -> MncEstimate:
    """Optimal discrete N-net by exhaustive search (at most ORACLE_CAP members)."""
    N = _check_budget(N, "net size N")
    n = len(U)
    if n > ORACLE_CAP:
        raise SizeCapExceeded(f"chi_oracle is capped at {ORACLE_CAP} members, got {n}")
    if N >= n:
        return MncEstimate("chi", N, 0.0, tuple(range(n)), n)
    d = pairwise_distances(U) if distances is None else distances
    best, best_c = math.inf, None
    for c in itertools.combinations(range(n), N):
        r = d[:, c].min(axis=1).max()
        if r < best:
            best, best_c = r, c
    return MncEstimate("chi", N, float(best), tuple(best_c), n)


# -- beta ----------------------------------------------------------------


def _min_pairwise(d, idx):
    sub = d[np.ix_(idx, idx)]
    iu = np.triu_indices(len(idx), k=1)
    return float(sub[iu].min())


def beta_hat(U: SampleSet, M: int, distances: np.ndarray | None = None) -> MncEstimate:
    """Greedy max-min dispersion of M members, started from the diameter pair."""
    if isinstance(M, bool) or int(M) != M or M < 2:
        raise InvalidArgument(f"packing size M must be an integer >= 2, got {M!r}")
    M = int(M)
    n = len(U)
    if n < M:
        raise InvalidArgument(f"cannot pick {M} members from a sample of {n}")
    d = pairwise_distances(U) if distances is None else distances
    i, j = diameter(U, d).witness
    chosen = [i, j]
    reach = np.minimum(d[i], d[j])
    reach[chosen] = -np.inf
    while len(chosen) < M:
        k = _first_max(np.where(np.isfinite(reach), reach, -1.0))
        chosen.append(k)
        reach = np.minimum(reach, d[k])
        reach[chosen] = -np.inf
    return MncEstimate("beta", M, _min_pairwise(d, chosen), tuple(chosen), n)


def beta_or_zero(U: SampleSet, M: int, distances: np.ndarray | None = None) -> MncEstimate:
    """beta_hat, except that sets with fewer than two members measure 0."""
    if len(U) < 2:
        return MncEstimate("beta", M, 0.0, (0,), len(U))
    return beta_hat(U, M, distances)


def beta_oracle(U: SampleSet, M: int, distances: np.ndarray | None = None) -> MncEstimate:
    """Best M-point dispersion by exhaustive search (at most ORACLE_CAP members)."""
    if isinstance(M, bool) or int(M) != M or M < 2:
        raise InvalidArgument(f"packing size M must be an integer >= 2, got {M!r}")
    n = len(U)
    if n > ORACLE_CAP:
        raise SizeCapExceeded(f"beta_oracle is capped at {ORACLE_CAP} members, got {n}")
    if n < M:
        raise InvalidArgument(f"cannot pick {M} members from a sample of {n}")
    d = pairwise_distances(U) if distances is None else distances
    best, best_c = -math.inf, None
    for c in itertools.combinations(range(n), int(M)):
        r = _min_pairwise(d, list(c))
        if r > best:
            best, best_c = r, c
    return MncEstimate("beta", int(M), float(best), tuple(best_c), n)


# -- nu ------------------------------------------------------------------


def _nu_masks(values, measures, p, delta, peak=None):
    """Greedy worst masks, one per row, as a boolean (rows, cells) array."""
    a = np.abs(values)
    key = a.copy()
    if peak is not None:
        norms = lp_norms(values, measures, p)
        key[~(a > peak * norms[:, None])] = -1.0
    order = np.argsort(-key, axis=1, kind="stable")
    cum = np.cumsum(measures[order], axis=1)
    take = cum <= delta * (1 + _MASS_RTOL)
    take &= np.take_along_axis(key, order, axis=1) >= 0
    masks = np.zeros_like(take)
    np.put_along_axis(masks, order, take, axis=1)
    return masks


def _check_delta(delta, space):
    if not (isinstance(delta, (int, float, np.floating)) and math.isfinite(delta) and delta > 0):
        raise InvalidArgument(f"delta must be a positive real, got {delta!r}")
    if delta > space.total_measure * (1 + _MASS_RTOL):
        raise InvalidArgument(f"delta {delta} exceeds the total measure {space.total_measure}")
    return float(delta)


def nu_hat(U: SampleSet, delta: float, peak: float | None = None) -> MncEstimate:
    """sup over members u and masks D with mu(D) <= delta of ||P_D u||_p.

    With `peak` set, D may only use cells where |u| > peak * ||u||, i.e.
    the part of u that a bounded function cannot reach; smooth members then
    contribute exactly 0.
    """
    delta = _check_delta(delta, U.space)
    masks = _nu_masks(U.values, U.space.measures, U.p, delta, peak)
    per_member = lp_norms(np.where(masks, U.values, 0.0), U.space.measures, U.p)
    i = _first_max(per_member)
    budget = delta if peak is None else {"delta": delta, "peak": peak}
    return MncEstimate("nu", budget, float(per_member[i]), (i, SubsetMask(U.space, masks[i])), len(U))


def max_projection_norm(f: Func, delta: float) -> float:
    """max over masks of mass <= delta of ||P_D f||: the nu_hat of {f}."""
    delta = _check_delta(delta, f.space)
    masks = _nu_masks(f.values[None, :], f.space.measures, f.p, delta)
    return float(lp_norms(np.where(masks, f.values, 0.0), f.space.measures, f.p)[0])


def default_delta_grid(space) -> list[float]:
    """total * 2^-k for k = 1, 2, ... down to the smallest cell measure."""
    grid = []
    d = space.total_measure / 2
    while d >= space.min_cell_measure * (1 - _MASS_RTOL):
        grid.append(d)
        d /= 2
    if not grid:
        grid = [space.min_cell_measure]
    return grid


@dataclass(frozen=True, eq=False)
class NuProfile:
    deltas: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    verdict: str
    tol_zero: float
    tail: int
    witnesses: tuple[MncEstimate, ...] = field(repr=False, default=())

    def plateau(self) -> float:
        return self.values[-1]

    def to_dict(self) -> dict:
        return {
            "deltas": list(self.deltas),
            "values": list(self.values),
            "slope": None if math.isnan(self.slope) else self.slope,
            "verdict": self.verdict,
            "tol_zero": self.tol_zero,
            "tail_points": self.tail,
        }

    def table(self) -> dict:
        return {"columns": ["delta", "nu_hat"], "rows": [[d, v] for d, v in zip(self.deltas, self.values)]}


def _loglog_slope(x, y) -> float:
    x, y = np.asarray(x), np.asarray(y)
    ok = y > 0
    if ok.sum() < 2:
        return math.inf if ok.sum() < len(y) else math.nan
    if ok.sum() < len(y):
        # the profile hits exactly zero inside the tail: decay is as steep as it gets
        return math.inf
    lx, ly = np.log(x), np.log(y)
    return float(np.polyfit(lx, ly, 1)[0])


def nu_profile(
    U: SampleSet,
    deltas: Sequence[float] | None = None,
    tol_zero: float | None = None,
    slope_min: float = 0.1,
    plateau_slope: float = 0.05,
    peak: float | None = None,
) -> NuProfile:
    """nu_hat over a decreasing delta grid plus a verdict on the delta -> 0 limit.

    The slope is the least-squares slope of log nu_hat against log delta over
    the last quarter of the grid (at least two points).  Verdicts, which are
    heuristics:

    * ``vanishing``      nu_hat at the smallest delta is <= tol_zero, or the
      tail decays at least like delta^slope_min;
    * ``non-vanishing``  the tail is flat (slope <= plateau_slope) above tol_zero;
    * ``inconclusive``   anything in between.
    """
    grid = default_delta_grid(U.space) if deltas is None else [float(d) for d in deltas]
    if not grid:
        raise InvalidArgument("empty delta grid")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgument("delta grid must be strictly decreasing")
    if grid[-1] < U.space.min_cell_measure * (1 - _MASS_RTOL):
        raise InvalidArgument(
            f"smallest delta {grid[-1]} is below the cell measure {U.space.min_cell_measure}"
        )
    if tol_zero is None:
        tol_zero = 1e-6 * float(U.norms().max())
    est = tuple(nu_hat(U, d, peak) for d in grid)
    vals = [e.value for e in est]
    tail = max(2, math.ceil(len(grid) / 4)) if len(grid) >= 2 else 1
    slope = _loglog_slope(grid[-tail:], vals[-tail:]) if len(grid) >= 2 else math.nan
    if vals[-1] <= tol_zero:
        verdict = "vanishing"
    elif not math.isnan(slope) and slope >= slope_min:
        verdict = "vanishing"
    elif not math.isnan(slope) and slope <= plateau_slope:
        verdict = "non-vanishing"
    else:
        verdict = "inconclusive"
    return NuProfile(tuple(grid), tuple(vals), slope, verdict, float(tol_zero), tail, est)


# -- witnesses -----------------------------------------------------------


def verify_witness(U: SampleSet, est: MncEstimate) -> float:
    """Recompute an estimate's value from its witness alone."""
    if est.kind == "nu":
        member, mask = est.witness
        v = np.where(mask.included, U.values[member], 0.0)
        return float(lp_norms(v[None, :], U.space.measures, U.p)[0])
    idx = list(est.witness)
    if est.kind == "diameter":
        i, j = idx
        return 0.0 if i == j else float(_distances_to(U, i)[j])
    if est.kind == "chi":
        if len(set(idx)) >= len(U):
            return 0.0
        reach = np.min([_distances_to(U, c) for c in idx], axis=0)
        return float(reach.max())
    if est.kind == "beta":
        if len(idx) < 2:
            return 0.0
        return min(float(_distances_to(U, a)[b]) for a, b in itertools.combinations(idx, 2))
    raise InvalidArgument(f"unknown estimate kind {est.kind!r}")


# -- harness-facing wrapper ----------------------------------------------


@dataclass(frozen=True)
class Estimator:
    """An estimator choice with its budget, callable on a SampleSet.

    kind: ``diameter`` | ``chi`` (budget N) | ``beta`` (budget M) | ``nu``
    (budget delta, optional ``peak`` factor).
    """

    kind: str
    budget: Any = None
    peak: float | None = None

    def __post_init__(self):
        if self.kind not in ("diameter", "chi", "beta", "nu"):
            raise InvalidArgument(f"unknown estimator kind {self.kind!r}")
        if self.kind in ("chi", "beta", "nu") and self.budget is None:
            raise InvalidArgument(f"estimator {self.kind!r} needs a budget")
        if self.peak is not None and self.kind != "nu":
            raise InvalidArgument("only the nu estimator takes a peak factor")

    def estimate(self, U: SampleSet) -> MncEstimate:
        if self.kind == "diameter":
            return diameter(U)
        if self.kind == "chi":
            return chi_hat(U, self.budget)
        if self.kind == "beta":
            return beta_or_zero(U, self.budget)
        return nu_hat(U, self.budget, self.peak)

    def __call__(self, U: SampleSet) -> float:
        return self.estimate(U).value

    @property
    def translation_invariant(self) -> bool:
        return self.kind != "nu"

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.budget is not None:
            d["budget"] = self.budget
        if self.peak is not None:
            d["peak"] = self.peak
        return d

    @classmethod
    def from_dict(cls, d) -> "Estimator":
        if isinstance(d, Estimator):
            return d
        if isinstance(d, str):
            return cls(d)
        budget = d.get("budget", d.get("N", d.get("M", d.get("delta"))))
        return cls(d["kind"], budget, d.get("peak"))

    def label(self) -> str:
        if self.kind == "diameter":
            return "diameter"
        extra = f",peak={self.peak:g}" if self.peak is not None else ""
        return f"{self.kind}({self.budget:g}{extra})"


def nu_translation_bound(shift: Func, delta: float) -> float:
    """Bound on |nu_hat(U + shift) - nu_hat(U)| at mass budget delta."""
    return max_projection_norm(shift, delta)
