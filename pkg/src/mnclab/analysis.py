"""Experiments on semi-homogeneous operators and condensing classes.

Conventions shared by every routine here:

* Samples are drawn once at unit scale (a ball, a sphere, an annulus
  ``1 < ||u|| <= 2``) and every radius in a grid uses the memberwise
  multiple of that same sample.  Scaling identities then hold per member, so
  estimator identities such as ``psi(B_r) = r psi(B_1)`` are exact.
* "psi = 0" means ``value <= zero_factor * reference``, where the reference
  is the estimate of the corresponding un-mapped set.
* A rate ``lambda(r) -> 0`` is read off a finite grid: the last quarter of
  the rates must be non-increasing and the final rate below ``rate_tol``.
* Condensing rates divide by ``psi(B_r)`` (resp. ``psi(S_r)``), not by
  ``psi(u1 + B_r)``: translation invariance makes the two equal for the
  distance-based estimators, and for nu it holds in the delta -> 0 limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    DegenerateDegree,
    DegenerateDenominator,
    InvalidArgument,
    NotSemiHomogeneous,
    PreconditionError,
)
from .estimators import Estimator, chi_hat, beta_hat, nu_profile, nu_hat, pairwise_distances, max_projection_norm
from .operators import (
    OperatorSpec,
    apply_set,
    frechet_analytic,
    is_linear_numerically,
    linear_part,
    remainder_ratio,
    asymptotic_remainder_ratio,
    shift_argument,
    subtract_value,
    sum_op,
    apply,
)
from .sets import (
    GeneratorSpec,
    SampleSet,
    annulus_sample,
    ball_sample,
    build,
    scale_set,
    sphere_sample,
    translate_set,
)
from .space import Func, MeasureSpace, zero_func

__all__ = [
    "ZERO_FACTOR",
    "RATE_TOL",
    "CONTRAST_THRESHOLDS",
    "Samples",
    "standard_samples",
    "DegreeEstimate",
    "RateTable",
    "ClassReport",
    "ContrastTable",
    "estimate_degree",
    "check_spherical",
    "lemma1_check",
    "condensing_rate",
    "classify_theorem1",
    "improving_check",
    "comparability_check",
    "complete_continuity_contrast",
    "frechet_class_suite",
    "calibrate_contrast",
]

ZERO_FACTOR = 1e-6
RATE_TOL = 1e-3
DEGREE_SLACK = 1e-6
RATE_RTOL = 1e-9
PLATEAU_DECAY = 0.05

# Frozen from the identity / rank-one endpoint run (calibrate_contrast with
# its defaults); the run itself is stored in tests/golden/contrast_calibration.json
# and regenerated by demos/calibrate_contrast.py.
CONTRAST_THRESHOLDS = {
    "chi": {"ratio_tol": 0.17613231825193007, "margin": 0.19158019482388228},
    "beta": {"ratio_tol": 0.18437099028803614, "margin": 0.02955009619316845},
}
CALIBRATION = {"cell_count": 1024, "sample_size": 512, "seed": 0, "budgets": (2, 4, 8, 16, 32)}

POINT_MODES = ("balls-at-point", "spheres-at-point")
INFINITY_MODES = ("annuli-at-infinity", "spheres-at-infinity")


def zero_tol(reference: float, factor: float = ZERO_FACTOR) -> float:
    return factor * abs(reference)


def _tail(n: int) -> int:
    return min(n, max(2, math.ceil(n / 4)))


def _non_increasing(xs: Sequence[float]) -> bool:
    return all(b <= a * (1 + RATE_RTOL) + 1e-300 for a, b in zip(xs, xs[1:]))


# -- samples -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Samples:
    """Unit-scale base samples: ball B_1, sphere S_1 and annulus 1 < ||u|| <= 2."""

    ball: SampleSet
    sphere: SampleSet
    annulus: SampleSet

    @property
    def p(self) -> float:
        return self.ball.p

    def to_dict(self):
        return {k: getattr(self, k).provenance.to_dict() for k in ("ball", "sphere", "annulus")}


def standard_samples(space: MeasureSpace, p: float = 2.0, count: int = 64, seed: int = 0, mixture=None) -> Samples:
    return Samples(
        ball_sample(space, p, 1.0, count, seed, mixture),
        sphere_sample(space, p, 1.0, count, seed + 1, mixture),
        annulus_sample(space, p, 1.0, 2.0, count, seed + 2, mixture),
    )


def _as_estimator(e) -> Estimator:
    return Estimator.from_dict(e)


def _is_zero_func(u) -> bool:
    return u is None or (isinstance(u, Func) and not np.any(u.values))


# -- degree --------------------------------------------------------------


@dataclass(frozen=True)
class DegreeEstimate:
    k_hat: float
    rho_grid: tuple[float, ...]
    values: tuple[float, ...]
    residual: float
    estimator: dict

    def table(self) -> dict:
        lr = np.log(self.rho_grid)
        b = np.mean(np.log(self.values) - self.k_hat * lr)
        res = np.log(self.values) - (self.k_hat * lr + b)
        return {
            "columns": ["rho", "psi", "log_residual"],
            "rows": [[r, v, float(e)] for r, v, e in zip(self.rho_grid, self.values, res)],
        }

    def to_dict(self):
        return {
            "k_hat": self.k_hat,
            "rho_grid": list(self.rho_grid),
            "values": list(self.values),
            "residual": self.residual,
            "estimator": self.estimator,
        }


def estimate_degree(T: OperatorSpec, estimator, base: SampleSet, rho_grid: Sequence[float]) -> DegreeEstimate:
    """Least-squares slope of log psi(T(rho U)) against log rho."""
    est = _as_estimator(estimator)
    grid = [float(r) for r in rho_grid]
    if len(grid) < 3 or any(r <= 0 for r in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgument("rho grid needs at least 3 strictly increasing positive values")
    vals = []
    for r in grid:
        U = scale_set(base, r)
        v = est(apply_set(T, U))
        if v <= zero_tol(est(U)) or v <= 0:
            raise DegenerateDegree(f"psi(T(rho U)) vanishes at rho={r:g}; the degree is undefined")
        vals.append(v)
    lr, lv = np.log(grid), np.log(vals)
    k, b = np.polyfit(lr, lv, 1)
    residual = float(np.max(np.abs(lv - (k * lr + b))))
    return DegreeEstimate(float(k), tuple(grid), tuple(vals), residual, est.to_dict())


def _degree_evidence(T: OperatorSpec, est: Estimator, base: SampleSet, grid: Sequence[float]) -> dict:
    """Degree of T by regression, else by construction; raises if neither applies."""
    if T.is_zero:
        return {"source": "vacuous", "k": None, "note": "zero operator: every degree fits"}
    try:
        d = estimate_degree(T, est, base, sorted(grid))
    except DegenerateDegree as exc:
        k = T.declared_degree()
        if k is None:
            raise NotSemiHomogeneous(f"{exc}; and {T.kind} declares no degree") from exc
        return {"source": "construction", "k": k, "note": str(exc)}
    if d.residual < DEGREE_SLACK:
        return {"source": "regression", "k": d.k_hat, "residual": d.residual}
    k = T.declared_degree()
    if k is not None:
        return {"source": "construction", "k": k, "residual": d.residual}
    raise NotSemiHomogeneous(f"log-log residual {d.residual:.3g} exceeds {DEGREE_SLACK:g} and no degree is declared")


# -- spherical property and its degree bound ------------------------------


def check_spherical(
    estimator, T: OperatorSpec, rho1: float, rho0_grid: Sequence[float], samples: Samples,
    zero_factor: float = ZERO_FACTOR,
) -> dict:
    """Both directions of psi(T(B_rho1)) > 0  <=>  psi(T(S_rho0)) > 0 for some rho0 <= rho1."""
    est = _as_estimator(estimator)
    grid = [float(r) for r in rho0_grid]
    if not grid:
        raise InvalidArgument("rho0 grid must be non-empty")
    if any(not 0 < r <= rho1 for r in grid):
        raise InvalidArgument("rho0 values must lie in (0, rho1]")
    B = scale_set(samples.ball, rho1)
    ball_value = est(apply_set(T, B))
    ball_pos = ball_value > zero_tol(est(B), zero_factor)
    spheres = []
    for r in grid:
        S = scale_set(samples.sphere, r)
        v = est(apply_set(T, S))
        spheres.append({"rho0": r, "value": v, "positive": bool(v > zero_tol(est(S), zero_factor))})
    some_sphere = any(s["positive"] for s in spheres)
    out = {
        "estimator": est.to_dict(),
        "rho1": rho1,
        "ball_value": ball_value,
        "ball_positive": bool(ball_pos),
        "spheres": spheres,
        "best_sphere_value": max(s["value"] for s in spheres),
        "ball_implies_sphere": bool((not ball_pos) or some_sphere),
        "sphere_implies_ball": bool((not some_sphere) or ball_pos),
    }
    out["biconditional_holds"] = out["ball_implies_sphere"] and out["sphere_implies_ball"]
    if est.kind == "nu":
        out["profile_verdicts"] = {
            "ball": nu_profile(apply_set(T, B)).verdict,
            "spheres": [nu_profile(apply_set(T, scale_set(samples.sphere, r))).verdict for r in grid],
        }
    return out


def lemma1_check(
    estimator, T: OperatorSpec, rho1: float, rho_grid: Sequence[float], samples: Samples,
    zero_factor: float = ZERO_FACTOR,
) -> dict:
    """If psi(T(S_rho1)) = 0, check psi(T(S_rho)) = psi(T(B_rho)) = 0 across the grid."""
    est = _as_estimator(estimator)
    degree = _degree_evidence(T, est, samples.sphere, rho_grid)
    S1 = scale_set(samples.sphere, rho1)
    hyp_value = est(apply_set(T, S1))
    hyp = hyp_value <= zero_tol(est(S1), zero_factor)
    out = {
        "estimator": est.to_dict(),
        "degree": degree,
        "rho1": rho1,
        "hypothesis_value": hyp_value,
        "hypothesis_met": bool(hyp),
    }
    if not hyp:
        out["status"] = "hypothesis not met"
        out["conclusion_holds"] = None
        return out
    rows = []
    for r in rho_grid:
        S, B = scale_set(samples.sphere, r), scale_set(samples.ball, r)
        vs, vb = est(apply_set(T, S)), est(apply_set(T, B))
        rows.append(
            {"rho": r, "sphere_value": vs, "ball_value": vb,
             "zero": bool(vs <= zero_tol(est(S), zero_factor) and vb <= zero_tol(est(B), zero_factor))}
        )
    out["rows"] = rows
    out["conclusion_holds"] = all(r["zero"] for r in rows)
    out["status"] = "conclusion holds" if out["conclusion_holds"] else "conclusion violated"
    return out


# -- condensing rates ----------------------------------------------------


@dataclass(frozen=True)
class RateTable:
    mode: str
    anchor: str
    radii: tuple[float, ...]
    psi_image: tuple[float, ...]
    psi_set: tuple[float, ...]
    rates: tuple[float, ...]
    lambdas: tuple[float, ...]
    verdict: str
    rate_tol: float

    def table(self) -> dict:
        return {
            "columns": ["radius", "psi_image", "psi_set", "rate"],
            "rows": [list(r) for r in zip(self.radii, self.psi_image, self.psi_set, self.rates)],
        }

    def to_dict(self):
        return {
            "mode": self.mode,
            "anchor": self.anchor,
            "radii": list(self.radii),
            "psi_image": list(self.psi_image),
            "psi_set": list(self.psi_set),
            "rates": list(self.rates),
            "lambda": list(self.lambdas),
            "verdict": self.verdict,
            "rate_tol": self.rate_tol,
        }


def _reseeded(U: SampleSet, seed: int) -> SampleSet:
    spec = U.provenance
    if "seed" not in spec.params:
        raise InvalidArgument(f"cannot resample a {spec.kind!r} set: it has no seed")
    return build(GeneratorSpec(spec.kind, {**spec.params, "seed": int(seed)}, spec.base), U.space)


def _rate_verdict(radii: Sequence[float], rates: Sequence[float], rate_tol: float) -> str:
    n = _tail(len(rates))
    tail, rs = list(rates[-n:]), list(radii[-n:])
    if _non_increasing(tail) and tail[-1] < rate_tol:
        return "member"
    if tail[-1] >= rate_tol and tail[0] > 0:
        # decay exponent of the rate over the tail, in powers of the radius
        span = abs(math.log(rs[-1] / rs[0]))
        decay = math.log(tail[0] / tail[-1]) / span if span > 0 else 0.0
        if decay <= PLATEAU_DECAY:
            return "non-member"
    return "inconclusive"


def condensing_rate(
    f: OperatorSpec,
    anchor,
    mode: str,
    estimator,
    radii: Sequence[float],
    samples: Samples,
    rate_tol: float = RATE_TOL,
    envelope: bool = False,
    resample_seed: int | None = None,
) -> RateTable:
    """Rows (r, psi(f(U_r)), psi(U_r), ratio) and a class-membership verdict.

    With ``envelope`` the verdict reads the running-max envelope lambda(r)
    instead of the raw rates (used where rates settle on a positive plateau
    with estimator noise, as for chi on a differentiable map).

    Point modes take ``U_r = u1 + r B_1`` (or ``u1 + r S_1``) over a radius
    grid decreasing to 0; infinity modes take ``R * (annulus 1 < ||u|| <= 2)``
    or ``R S_1`` over an increasing grid.

    By default one base sample is rescaled across the grid, which makes the
    rate laws exact.  ``resample_seed`` instead draws the i-th radius from
    the same generator with seed ``resample_seed + i``, for robustness runs.
    """
    est = _as_estimator(estimator)
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise InvalidArgument("radii must be positive")
    if mode in POINT_MODES:
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise InvalidArgument("point modes need a strictly decreasing radius grid")
        base = samples.ball if mode == "balls-at-point" else samples.sphere
    elif mode in INFINITY_MODES:
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise InvalidArgument("infinity modes need a strictly increasing radius grid")
        base = samples.annulus if mode == "annuli-at-infinity" else samples.sphere
        anchor = None
    else:
        raise InvalidArgument(f"unknown mode {mode!r}")
    shift = None if _is_zero_func(anchor) else anchor
    img, den, rates = [], [], []
    for i, r in enumerate(radii):
        U = scale_set(base if resample_seed is None else _reseeded(base, resample_seed + i), r)
        d = est(U)
        if d <= 0:
            raise DegenerateDenominator(f"psi(U_r) vanishes at r={r:g}", r)
        V = U if shift is None else translate_set(U, shift)
        v = est(apply_set(f, V))
        img.append(v)
        den.append(d)
        rates.append(v / d)
    # lambda(r) must bound the rate at every radius further along the grid
    lam = [max(rates[i:]) for i in range(len(rates))]
    label = "infinity" if mode in INFINITY_MODES else ("zero" if shift is None else "u1")
    return RateTable(
        mode, label, tuple(radii), tuple(img), tuple(den), tuple(rates), tuple(lam),
        _rate_verdict(radii, lam if envelope else rates, rate_tol), rate_tol,
    )


# -- class agreement at a point or at infinity ---------------------------


@dataclass(frozen=True)
class ClassReport:
    operator: dict
    decomposition: dict | None
    verdicts: dict
    evidence: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return len(set(self.verdicts.values())) == 1

    def to_dict(self):
        return {
            "operator": self.operator,
            "decomposition": self.decomposition,
            "verdicts": dict(self.verdicts),
            "consistent": self.consistent,
            "evidence": self.evidence,
        }


def _member(flag: bool) -> str:
    return "member" if flag else "non-member"


def classify_theorem1(
    A1: OperatorSpec,
    A0: OperatorSpec,
    anchor,
    estimator,
    samples: Samples,
    radii: Sequence[float],
    sphere_grid: Sequence[float],
    rate_tol: float = RATE_TOL,
    zero_factor: float = ZERO_FACTOR,
) -> ClassReport:
    """Verdicts for (lambda_0), (lambda_2), (lambda_3), or their tilde versions.

    ``anchor`` is a Func u1 (point classes, f(u1 + u) = A1(u) + A0(u)) or the
    string ``"infinity"`` (f = A1 + A0 near infinity).  Point mode needs a
    decreasing radius grid, infinity mode an increasing one.
    """
    est = _as_estimator(estimator)
    at_inf = isinstance(anchor, str) and anchor == "infinity"
    degree = _degree_evidence(A1, est, samples.sphere, sphere_grid)
    k = degree["k"]
    if k is not None:
        if not at_inf and k > 1 + DEGREE_SLACK:
            raise PreconditionError(f"A1 must be semi-homogeneous of degree 0 < k <= 1, got k = {k:.9g}")
        if at_inf and k < 1 - DEGREE_SLACK:
            raise PreconditionError(f"the operator near infinity needs degree k >= 1, got k = {k:.9g}")
    a0_mode = "annuli-at-infinity" if at_inf else "balls-at-point"
    a0_rates = condensing_rate(A0, None, a0_mode, est, radii, samples, rate_tol)
    if a0_rates.verdict != "member":
        raise PreconditionError(f"A0 is not strongly condensing in mode {a0_mode} (verdict {a0_rates.verdict})")

    lam0_rows = []
    for r in sorted(sphere_grid):
        S = scale_set(samples.sphere, r)
        v = est(apply_set(A1, S))
        lam0_rows.append({"rho": r, "value": v, "zero": bool(v <= zero_tol(est(S), zero_factor))})
    lam0 = all(row["zero"] for row in lam0_rows)

    f = sum_op(A1, A0)
    if at_inf:
        t2 = condensing_rate(f, None, "annuli-at-infinity", est, radii, samples, rate_tol)
        t3 = condensing_rate(f, None, "spheres-at-infinity", est, radii, samples, rate_tol)
        names = ("tilde_lambda0", "tilde_lambda2", "tilde_lambda3")
        anchor_d = "infinity"
    else:
        u1 = anchor if isinstance(anchor, Func) else zero_func(samples.ball.space, A1.q)
        if np.any(u1.values):
            f = shift_argument(f, -u1)
        t2 = condensing_rate(f, u1, "balls-at-point", est, radii, samples, rate_tol)
        t3 = condensing_rate(f, u1, "spheres-at-point", est, radii, samples, rate_tol)
        names = ("lambda0", "lambda2", "lambda3")
        anchor_d = "zero" if not np.any(u1.values) else "u1"
    verdicts = {names[0]: _member(lam0), names[1]: t2.verdict, names[2]: t3.verdict}
    return ClassReport(
        f.to_dict(),
        {"A1": A1.to_dict(), "A0": A0.to_dict(), "anchor": anchor_d},
        verdicts,
        {
            "estimator": est.to_dict(),
            "A1_degree": degree,
            "A0_rates": a0_rates.to_dict(),
            names[0]: lam0_rows,
            names[1]: t2.to_dict(),
            names[2]: t3.to_dict(),
        },
    )


# -- improving operators and comparability -------------------------------


def _spike_rich(spec: GeneratorSpec) -> bool:
    if spec.kind == "spike":
        return True
    if spec.kind in ("ball-mixture", "sphere", "annulus"):
        mix = spec.params.get("mixture") or {}
        return float(mix.get("spike", 0.0)) > 0
    return any(_spike_rich(b) for b in spec.base)


def improving_check(T: OperatorSpec, suite: Sequence[SampleSet], deltas: Sequence[float] | None = None) -> dict:
    """T is improving when every image in the suite has a vanishing nu profile."""
    if not suite:
        raise InvalidArgument("the set suite is empty")
    if not any(_spike_rich(U.provenance) for U in suite):
        raise InvalidArgument("the suite must contain a spike-rich set (spike family or spiky ball)")
    profiles = [nu_profile(apply_set(T, U), deltas) for U in suite]
    verdicts = [pr.verdict for pr in profiles]
    if all(v == "vanishing" for v in verdicts):
        verdict = "improving"
    elif any(v == "non-vanishing" for v in verdicts):
        verdict = "not improving"
    else:
        verdict = "inconclusive"
    return {
        "verdict": verdict,
        "profiles": [
            {"set": U.provenance.kind, **pr.to_dict()} for U, pr in zip(suite, profiles)
        ],
        "plateau": max(pr.values[-1] for pr in profiles),
    }


def comparability_check(F: OperatorSpec, F1: OperatorSpec, b1: Func, U: SampleSet, delta: float) -> dict:
    """Check |F(u)(s)| <= |b1(s)| + |F1(u)(s)| everywhere, then the nu ordering it implies."""
    if not (F.p == F1.p and F.q == F1.q and b1.p == F.p):
        raise InvalidArgument("F, F1 and b1 must share domain and codomain")
    FU, F1U = apply_set(F, U), apply_set(F1, U)
    lhs = np.abs(FU.values)
    rhs = np.abs(b1.values)[None, :] + np.abs(F1U.values)
    scale = max(float(rhs.max()), float(lhs.max()), 1.0)
    bad = lhs > rhs + 1e-12 * scale
    out: dict[str, Any] = {"delta": delta}
    if bad.any():
        member, cell = (int(x) for x in np.argwhere(bad)[0])
        out.update(
            pointwise_domination_holds=False,
            nu_ordering_holds=None,
            witness={"member": member, "cell": cell, "lhs": float(lhs[member, cell]), "rhs": float(rhs[member, cell])},
        )
        return out
    nF = nu_hat(FU, delta).value
    nF1 = nu_hat(F1U, delta).value
    corr = max_projection_norm(b1, delta)
    out.update(
        pointwise_domination_holds=True,
        nu_F=nF,
        nu_F1=nF1,
        b1_correction=corr,
        nu_ordering_holds=bool(nF <= nF1 + corr + 1e-12),
    )
    return out


# -- differentiable maps ------------------------------------------------


@dataclass(frozen=True)
class ContrastTable:
    kind: str
    budgets: tuple[int, ...]
    image_values: tuple[float, ...]
    set_values: tuple[float, ...]
    ratios: tuple[float, ...]
    verdict: str
    ratio_tol: float
    margin: float

    def table(self) -> dict:
        return {
            "columns": ["N", "psi_image", "psi_set", "ratio"],
            "rows": [list(r) for r in zip(self.budgets, self.image_values, self.set_values, self.ratios)],
        }

    def to_dict(self):
        return {
            "kind": self.kind,
            "budgets": list(self.budgets),
            "image_values": list(self.image_values),
            "set_values": list(self.set_values),
            "ratios": list(self.ratios),
            "verdict": self.verdict,
            "ratio_tol": self.ratio_tol,
            "margin": self.margin,
        }


def complete_continuity_contrast(
    L: OperatorSpec,
    budgets: Sequence[int],
    sample: SampleSet,
    kind: str = "chi",
    ratio_tol: float | None = None,
    margin: float | None = None,
) -> ContrastTable:
    """psi(L(B_1), N) / psi(B_1, N) over net (or packing) sizes N.

    In finite dimensions every bounded set has chi = 0, so this is a
    fixed-budget proxy that means something only while N << |sample| <<
    cell count.
    """
    if kind not in ("chi", "beta"):
        raise InvalidArgument("contrast uses the chi or beta estimator")
    if not (L.linear and is_linear_numerically(L, sample.space)):
        raise PreconditionError(f"{L.kind} is not linear; the contrast applies to linear operators only")
    if sample.space.cell_count < 2 * len(sample):
        raise PreconditionError("the sample needs cell_count >= 2 * sample size for high effective dimension")
    cfg = CONTRAST_THRESHOLDS[kind]
    ratio_tol = cfg["ratio_tol"] if ratio_tol is None else ratio_tol
    margin = cfg["margin"] if margin is None else margin
    image = apply_set(L, sample)
    d_set = pairwise_distances(sample)
    d_img = d_set if image.identical_to(sample) else pairwise_distances(image)
    pick = chi_hat if kind == "chi" else beta_hat
    iv, sv, ratios = [], [], []
    for N in budgets:
        a = pick(image, N, d_img).value
        b = pick(sample, N, d_set).value
        if b <= 0:
            raise DegenerateDenominator(f"psi(B_1) vanishes at budget {N}", N)
        iv.append(a)
        sv.append(b)
        ratios.append(a / b)
    if ratios[-1] < ratio_tol:
        verdict = "compact-like"
    elif min(ratios) >= 1 - margin:
        verdict = "noncompact-like"
    else:
        verdict = "inconclusive"
    return ContrastTable(kind, tuple(int(n) for n in budgets), tuple(iv), tuple(sv), tuple(ratios), verdict, ratio_tol, margin)


def calibrate_contrast(
    cell_count: int = CALIBRATION["cell_count"],
    sample_size: int = CALIBRATION["sample_size"],
    seed: int = CALIBRATION["seed"],
    budgets: Sequence[int] = CALIBRATION["budgets"],
) -> dict:
    """Endpoint run that fixes the contrast thresholds.

    ratio_tol is the geometric midpoint of the identity and rank-one ratios at
    the largest budget; margin is half the gap between 1 and the largest
    rank-one ratio over the budgets.
    """
    from .operators import Kernel, identity, integral
    from .space import make_uniform_space

    space = make_uniform_space(cell_count)
    B = ball_sample(space, 2.0, 1.0, sample_size, seed)
    out = {"settings": {"cell_count": cell_count, "sample_size": sample_size, "seed": seed,
                        "budgets": [int(n) for n in budgets]}}
    for kind in ("chi", "beta"):
        loose = {"ratio_tol": 0.0, "margin": 1.0}
        ident = complete_continuity_contrast(identity(), budgets, B, kind, **loose)
        rank1 = complete_continuity_contrast(integral(Kernel.rank_one(space)), budgets, B, kind, **loose)
        out[kind] = {
            "identity": list(ident.ratios),
            "rank_one": list(rank1.ratios),
            "ratio_tol": math.sqrt(ident.ratios[-1] * rank1.ratios[-1]),
            "margin": (1.0 - max(rank1.ratios)) / 2,
        }
    return out


def _contrast_class(verdict: str) -> str:
    return {"compact-like": "member", "noncompact-like": "non-member"}.get(verdict, "inconclusive")


def frechet_class_suite(
    f: OperatorSpec,
    anchor,
    samples: Samples,
    radii: Sequence[float],
    budgets: Sequence[int],
    contrast_sample: SampleSet,
    kind: str = "chi",
    linear: OperatorSpec | None = None,
    rate_tol: float | None = None,
) -> ClassReport:
    """(lambda_1) from the derivative's contrast, (lambda_2)/(lambda_3) from f's rates.

    The rate estimator uses the largest budget in `budgets`; its threshold
    defaults to the frozen contrast threshold, since in finite dimensions the
    rate tends to the derivative's contrast ratio rather than to 0.
    """
    if kind not in ("chi", "beta"):
        raise InvalidArgument("the derivative suite uses the chi or beta estimator")
    est = Estimator(kind, int(max(budgets)))
    tol = CONTRAST_THRESHOLDS[kind]["ratio_tol"] if rate_tol is None else rate_tol
    at_inf = isinstance(anchor, str) and anchor == "infinity"
    if at_inf:
        L = linear_part(f) if linear is None else linear
        rem = asymptotic_remainder_ratio(f, sorted(radii), samples.sphere, L)
        if not rem.decays():
            raise PreconditionError("the asymptotic remainder ratio does not decay: f is not asymptotically linear")
        contrast = complete_continuity_contrast(L, budgets, contrast_sample, kind)
        t2 = condensing_rate(f, None, "annuli-at-infinity", est, sorted(radii), samples, tol, True)
        t3 = condensing_rate(f, None, "spheres-at-infinity", est, sorted(radii), samples, tol, True)
        names = ("tilde_lambda1", "tilde_lambda2", "tilde_lambda3")
        lin_desc = L.to_dict()
    else:
        u1 = anchor
        D = frechet_analytic(f, u1)
        rem = remainder_ratio(f, u1, sorted(radii, reverse=True), samples.sphere)
        if not rem.decays():
            raise PreconditionError("the remainder ratio does not decay: f is not differentiable at u1")
        contrast = complete_continuity_contrast(D.linear_op, budgets, contrast_sample, kind)
        g = subtract_value(shift_argument(f, u1), apply(f, u1))
        grid = sorted(radii, reverse=True)
        t2 = condensing_rate(g, None, "balls-at-point", est, grid, samples, tol, True)
        t3 = condensing_rate(g, None, "spheres-at-point", est, grid, samples, tol, True)
        names = ("lambda1", "lambda2", "lambda3")
        lin_desc = D.linear_op.to_dict()
    verdicts = {names[0]: _contrast_class(contrast.verdict), names[1]: t2.verdict, names[2]: t3.verdict}
    return ClassReport(
        f.to_dict(),
        {"linear_part": lin_desc, "anchor": "infinity" if at_inf else "u1"},
        verdicts,
        {
            "estimator": est.to_dict(),
            "remainder": rem.to_dict(),
            "contrast": contrast.to_dict(),
            names[1]: t2.to_dict(),
            names[2]: t3.to_dict(),
        },
    )
