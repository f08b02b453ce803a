"""Execute the tasks of an experiment configuration.

Each task kind maps to one executor returning a :class:`TaskOutcome`: a
JSON-ready result, named tables (columns + rows) for CSV export, the verdict
strings it produced and a list of consistency checks.  A failed check is a
finding, not an error: the run goes on and the exit code reports it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .analysis import (
    CONTRAST_THRESHOLDS,
    check_spherical,
    classify_theorem1,
    comparability_check,
    complete_continuity_contrast,
    condensing_rate,
    estimate_degree,
    frechet_class_suite,
    improving_check,
    lemma1_check,
    standard_samples,
)
from .config import ExperimentConfig, Resolver, parse_grid
from .errors import MnclabError
from .estimators import (
    Estimator,
    beta_hat,
    beta_oracle,
    chi_hat,
    chi_oracle,
    nu_profile,
    pairwise_distances,
    verify_witness,
)
from .operators import apply_set, zero_operator
from .sets import explicit_set, scale_set
from .space import make_uniform_space

SCALING_RTOL = 1e-12
RATE_LAW_RTOL = 1e-9


@dataclass
class TaskOutcome:
    result: dict
    tables: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def check(self, what: str, holds: bool, **detail):
        self.checks.append({"what": what, "holds": bool(holds), **detail})


class Context:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.res = Resolver(cfg)
        self.tol = cfg.tolerances
        self._samples = {}

    def samples(self, t):
        s = t["samples"]
        key = (float(s.get("p", 2.0)), int(s.get("count", 64)), int(s["seed"]), repr(s.get("mixture")))
        if key not in self._samples:
            self._samples[key] = standard_samples(self.res.space, key[0], key[1], key[2], s.get("mixture"))
        return self._samples[key]

    def estimator(self, d) -> Estimator:
        return Estimator.from_dict(d)


def _witness_key(est) -> Any:
    return est.to_dict()["witness"]


# -- executors -----------------------------------------------------------


def _estimate(ctx: Context, t) -> TaskOutcome:
    U = ctx.res.sample(t["set"])
    rows, items = [], []
    out = TaskOutcome({})
    for d in t["estimators"]:
        e = ctx.estimator(d)
        est = e.estimate(U)
        check = verify_witness(U, est)
        items.append({**est.to_dict(), "label": e.label(), "witness_value": check})
        rows.append([e.label(), est.value, check])
        out.check(f"{e.label()} witness reproduces the value", check == est.value)
        if "expect" in d:
            out.check(f"{e.label()} == {d['expect']}", est.value == d["expect"], value=est.value)
        if "expect_max" in d:
            bound = d["expect_max"] + 1e-12
            out.check(f"{e.label()} <= {d['expect_max']} + 1e-12", est.value <= bound, value=est.value)
    out.result = {"set": U.provenance.to_dict(), "size": len(U), "estimates": items}
    out.tables["estimates"] = {"columns": ["estimator", "value", "witness_value"], "rows": rows}
    return out


def _scaling(ctx: Context, t) -> TaskOutcome:
    factors = parse_grid(t["factors"])
    rows = []
    worst = 0.0
    same = True
    for name in t["sets"]:
        U = ctx.res.sample(name)
        for d in t["estimators"]:
            e = ctx.estimator(d)
            base = e.estimate(U)
            for r in factors:
                sc = e.estimate(scale_set(U, r))
                ref = r * base.value
                rel = abs(sc.value - ref) / abs(ref) if ref else abs(sc.value)
                w = _witness_key(sc) == _witness_key(base)
                worst = max(worst, rel)
                same &= w
                rows.append([name, e.label(), r, base.value, sc.value, rel, w])
    out = TaskOutcome({"max_relative_error": worst, "identical_witnesses": same, "rows": len(rows)})
    out.tables["scaling"] = {
        "columns": ["set", "estimator", "factor", "value", "scaled_value", "relative_error", "same_witness"],
        "rows": rows,
    }
    out.check(f"psi(rho U) = rho psi(U) within {SCALING_RTOL:g}", worst <= SCALING_RTOL, max_relative_error=worst)
    out.check("witnesses identical under scaling", same)
    return out


def _oracle(ctx: Context, t) -> TaskOutcome:
    rng = np.random.Generator(np.random.PCG64(int(t["seed"])))
    cells = int(t.get("cells", 16))
    space = make_uniform_space(cells)
    max_size = int(t["max_size"])
    rows = []
    bad = 0
    for trial in range(int(t["trials"])):
        size = 3 + int(rng.random() * (max_size - 2))
        p = (1.0, 2.0, 3.0)[int(rng.random() * 3)]
        U = explicit_set(space, p, 2.0 * rng.random((size, cells)) - 1.0)
        N = 1 + int(rng.random() * (size - 1))
        M = 2 + int(rng.random() * (size - 1))
        d = pairwise_distances(U)
        ch, co = chi_hat(U, N, d).value, chi_oracle(U, N, d).value
        bh, bo = beta_hat(U, M, d).value, beta_oracle(U, M, d).value
        eps = 1e-12 * max(d.max(), 1.0)
        ok = co - eps <= ch <= 2 * co + eps and bo / 2 - eps <= bh <= bo + eps
        bad += not ok
        rows.append([trial, size, p, N, ch, co, M, bh, bo, ok])
    out = TaskOutcome({"trials": len(rows), "violations": bad})
    out.tables["oracle"] = {
        "columns": ["trial", "size", "p", "N", "chi_hat", "chi_oracle", "M", "beta_hat", "beta_oracle", "ok"],
        "rows": rows,
    }
    out.check("oracle <= chi_hat <= 2 oracle and oracle/2 <= beta_hat <= oracle", bad == 0, violations=bad)
    return out


def _nu_profile(ctx: Context, t) -> TaskOutcome:
    U = ctx.res.sample(t["set"])
    if "operator" in t:
        U = apply_set(ctx.res.operator(t["operator"]), U)
    deltas = parse_grid(t["deltas"]) if "deltas" in t else None
    pr = nu_profile(U, deltas, peak=t.get("peak"))
    out = TaskOutcome(pr.to_dict(), {"profile": pr.table()}, [pr.verdict])
    if "expect_verdict" in t:
        out.check(f"profile verdict is {t['expect_verdict']}", pr.verdict == t["expect_verdict"])
    return out


def _degree(ctx: Context, t) -> TaskOutcome:
    T = ctx.res.operator(t["operator"])
    d = estimate_degree(T, ctx.estimator(t["estimator"]), ctx.res.sample(t["set"]), parse_grid(t["rho"]))
    out = TaskOutcome(d.to_dict(), {"degree": d.table()})
    if "expect_k" in t:
        tol = float(t.get("k_tol", 1e-6))
        out.check(f"k_hat = {t['expect_k']} within {tol:g}", abs(d.k_hat - t["expect_k"]) <= tol, k_hat=d.k_hat)
    if "residual_max" in t:
        out.check(f"residual <= {t['residual_max']:g}", d.residual <= t["residual_max"], residual=d.residual)
    return out


def _spherical(ctx: Context, t) -> TaskOutcome:
    r = check_spherical(
        ctx.estimator(t["estimator"]), ctx.res.operator(t["operator"]), float(t["rho1"]),
        parse_grid(t["rho0"]), ctx.samples(t), ctx.tol["zero_factor"],
    )
    out = TaskOutcome(r)
    out.tables["spheres"] = {
        "columns": ["rho0", "value", "positive"],
        "rows": [[s["rho0"], s["value"], s["positive"]] for s in r["spheres"]],
    }
    out.check("ball side implies sphere side", r["ball_implies_sphere"])
    out.check("sphere side implies ball side", r["sphere_implies_ball"])
    return out


def _lemma1(ctx: Context, t) -> TaskOutcome:
    r = lemma1_check(
        ctx.estimator(t["estimator"]), ctx.res.operator(t["operator"]), float(t["rho1"]),
        parse_grid(t["rho"]), ctx.samples(t), ctx.tol["zero_factor"],
    )
    out = TaskOutcome(r)
    if "rows" in r:
        out.tables["lemma1"] = {
            "columns": ["rho", "sphere_value", "ball_value"],
            "rows": [[x["rho"], x["sphere_value"], x["ball_value"]] for x in r["rows"]],
        }
    out.check("no violated conclusion", r["conclusion_holds"] is not False, status=r["status"])
    if "expect_status" in t:
        out.check(f"status is {t['expect_status']!r}", r["status"] == t["expect_status"])
    return out


def _anchor(ctx, t, p):
    return ctx.res.func(t.get("anchor", "zero"), p)


def _rate(ctx: Context, t) -> TaskOutcome:
    f = ctx.res.operator(t["operator"])
    radii = parse_grid(t["radii"])
    anchor = None if t["mode"].endswith("infinity") else _anchor(ctx, t, f.q)
    rt = condensing_rate(
        f, anchor, t["mode"], ctx.estimator(t["estimator"]), radii, ctx.samples(t),
        float(t.get("rate_tol", ctx.tol["rate_tol"])),
        resample_seed=t.get("resample_seed"),
    )
    out = TaskOutcome(rt.to_dict(), {"rates": rt.table()}, [rt.verdict])
    if "expect_exponent" in t:
        a = float(t["expect_exponent"])
        err = max(abs(x / r**a - 1.0) for x, r in zip(rt.rates, rt.radii))
        out.result["rate_law_max_relative_error"] = err
        out.check(f"rate(r) = r^{a:g} within {RATE_LAW_RTOL:g}", err <= RATE_LAW_RTOL, max_relative_error=err)
    if "expect_verdict" in t:
        out.check(f"verdict is {t['expect_verdict']}", rt.verdict == t["expect_verdict"])
    return out


def _theorem1(ctx: Context, t) -> TaskOutcome:
    A1, A0 = ctx.res.operator(t["A1"]), ctx.res.operator(t["A0"])
    rep = classify_theorem1(
        A1, A0, _anchor(ctx, t, A1.q), ctx.estimator(t["estimator"]), ctx.samples(t),
        parse_grid(t["radii"]), parse_grid(t["sphere_grid"]),
        float(t.get("rate_tol", ctx.tol["rate_tol"])), ctx.tol["zero_factor"],
    )
    out = TaskOutcome(rep.to_dict(), verdicts=list(rep.verdicts.values()))
    for k, v in rep.evidence.items():
        if isinstance(v, dict) and "rates" in v and k != "A0_rates":
            out.tables[k] = {
                "columns": ["radius", "psi_image", "psi_set", "rate"],
                "rows": [list(r) for r in zip(v["radii"], v["psi_image"], v["psi_set"], v["rates"])],
            }
    out.check("class verdicts agree", rep.consistent, verdicts=rep.verdicts)
    if "expect" in t:
        out.check(f"verdicts are {t['expect']}", set(rep.verdicts.values()) == {t["expect"]})
    return out


def _improving(ctx: Context, t) -> TaskOutcome:
    T = ctx.res.operator(t["operator"])
    suite = [ctx.res.sample(n) for n in t["suite"]]
    deltas = parse_grid(t["deltas"]) if "deltas" in t else None
    r = improving_check(T, suite, deltas)
    out = TaskOutcome(r, verdicts=[r["verdict"]])
    for i, pr in enumerate(r["profiles"]):
        out.tables[f"profile-{t['suite'][i]}"] = {
            "columns": ["delta", "nu_hat"],
            "rows": [[d, v] for d, v in zip(pr["deltas"], pr["values"])],
        }
    if "cross_check" in t:
        cc = t["cross_check"]
        rep = classify_theorem1(
            T, zero_operator(T.q, T.p), ctx.res.func("zero", T.q), ctx.estimator(cc["estimator"]),
            ctx.samples(cc), parse_grid(cc["radii"]), parse_grid(cc["sphere_grid"]),
            ctx.tol["rate_tol"], ctx.tol["zero_factor"],
        )
        lam0 = rep.verdicts["lambda0"]
        out.result["lambda0"] = lam0
        out.result["theorem1_verdicts"] = rep.verdicts
        out.verdicts.extend(rep.verdicts.values())
        agree = (r["verdict"] == "improving") == (lam0 == "member") and r["verdict"] != "inconclusive"
        out.check("improving <=> lambda0 member", agree, improving=r["verdict"], lambda0=lam0)
    if "expect" in t:
        out.check(f"verdict is {t['expect']}", r["verdict"] == t["expect"])
    return out


def _comparability(ctx: Context, t) -> TaskOutcome:
    F, F1 = ctx.res.operator(t["F"]), ctx.res.operator(t["F1"])
    b1 = ctx.res.func(t.get("b1", "zero"), F.p)
    r = comparability_check(F, F1, b1, ctx.res.sample(t["set"]), float(t["delta"]))
    out = TaskOutcome(r)
    if r["pointwise_domination_holds"]:
        out.check("nu ordering follows from domination", r["nu_ordering_holds"])
    if "expect_domination" in t:
        out.check(f"domination is {t['expect_domination']}", r["pointwise_domination_holds"] == t["expect_domination"])
    return out


def _contrast(ctx: Context, t) -> TaskOutcome:
    kind = t.get("estimator", "chi")
    c = complete_continuity_contrast(
        ctx.res.operator(t["operator"]), t["budgets"], ctx.res.sample(t["set"]), kind,
        t.get("ratio_tol"), t.get("margin"),
    )
    out = TaskOutcome(c.to_dict(), {"contrast": c.table()}, [c.verdict])
    if "expect_ratio" in t:
        out.check(f"ratio == {t['expect_ratio']} at every N", all(x == t["expect_ratio"] for x in c.ratios))
    if "expect_verdict" in t:
        out.check(f"verdict is {t['expect_verdict']}", c.verdict == t["expect_verdict"])
    return out


def _contrast_order(ctx: Context, t) -> TaskOutcome:
    kind = t.get("estimator", "chi")
    U = ctx.res.sample(t["set"])
    tables = {}
    for name in t["operators"]:
        tables[name] = complete_continuity_contrast(ctx.res.operator(name), t["budgets"], U, kind)
    names = list(t["operators"])
    rows = []
    ordered = True
    for i, N in enumerate(t["budgets"]):
        vals = [tables[n].ratios[i] for n in names]
        ok = all(a > b for a, b in zip(vals, vals[1:]))
        ordered &= ok
        rows.append([N, *vals])
    out = TaskOutcome(
        {"order": names, "ratios": {n: list(tables[n].ratios) for n in names},
         "thresholds": CONTRAST_THRESHOLDS[kind]},
        {"ratios": {"columns": ["N", *names], "rows": rows}},
    )
    out.check("ratios strictly ordered as listed at every N", ordered)
    return out


def _frechet(ctx: Context, t) -> TaskOutcome:
    f = ctx.res.operator(t["operator"])
    anchor = _anchor(ctx, t, f.q)
    lin = ctx.res.operator(t["linear"]) if "linear" in t else None
    args = (f, anchor, ctx.samples(t), parse_grid(t["radii"]), t["budgets"], ctx.res.sample(t["contrast_set"]))
    kinds = ["chi", "beta"] if t.get("also_beta") else ["chi"]
    reports = {k: frechet_class_suite(*args, kind=k, linear=lin) for k in kinds}
    rep = reports["chi"]
    out = TaskOutcome(
        {k: r.to_dict() for k, r in reports.items()},
        {"contrast": _tab_contrast(rep.evidence["contrast"])},
        [v for r in reports.values() for v in r.verdicts.values()],
    )
    for k, r in reports.items():
        out.check(f"{k}: class verdicts agree", r.consistent, verdicts=r.verdicts)
    if "beta" in reports:
        out.check("chi and beta verdicts agree", reports["beta"].verdicts == rep.verdicts)
    if "expect" in t:
        out.check(f"verdicts are {t['expect']}", set(rep.verdicts.values()) == {t["expect"]})
    return out


def _tab_contrast(c):
    return {
        "columns": ["N", "psi_image", "psi_set", "ratio"],
        "rows": [list(r) for r in zip(c["budgets"], c["image_values"], c["set_values"], c["ratios"])],
    }


EXECUTORS: dict[str, Callable[[Context, dict], TaskOutcome]] = {
    "estimate": _estimate,
    "scaling": _scaling,
    "oracle": _oracle,
    "nu_profile": _nu_profile,
    "degree": _degree,
    "spherical": _spherical,
    "lemma1": _lemma1,
    "condensing_rate": _rate,
    "theorem1": _theorem1,
    "improving": _improving,
    "comparability": _comparability,
    "contrast": _contrast,
    "contrast_order": _contrast_order,
    "frechet": _frechet,
}


# -- driver ----------------------------------------------------------------


def run_config(cfg: ExperimentConfig, clock=time.perf_counter) -> dict:
    """Run every task in order and assemble the report (timings kept apart)."""
    ctx = Context(cfg)
    ctx.res.check_buildable()
    records, timings = [], {}
    for t in cfg.tasks:
        t0 = clock()
        rec = {"name": t["name"], "kind": t["kind"]}
        try:
            o = EXECUTORS[t["kind"]](ctx, t)
        except (MnclabError, ValueError, KeyError, TypeError, ArithmeticError) as exc:
            rec.update(status="error", error=f"{type(exc).__name__}: {exc}", verdicts=[], checks=[], tables={})
        else:
            rec.update(status="ok", result=o.result, tables=o.tables, verdicts=o.verdicts, checks=o.checks)
        timings[t["name"]] = clock() - t0
        records.append(rec)
    return {
        "version": __version__,
        "config": cfg.echo(),
        "tasks": records,
        "summary": summarize(records),
        "timings": timings,
    }


def summarize(records) -> dict:
    failed = [r["name"] for r in records if r["status"] == "error"]
    broken = [r["name"] for r in records if any(not c["holds"] for c in r["checks"])]
    inconclusive = [r["name"] for r in records if "inconclusive" in r["verdicts"]]
    return {
        "tasks": len(records),
        "errors": failed,
        "failed_checks": broken,
        "inconclusive": inconclusive,
    }


def exit_code(report: dict, strict: bool = False) -> int:
    s = report["summary"]
    if s["errors"]:
        return 1
    if s["failed_checks"]:
        return 2
    if strict and s["inconclusive"]:
        return 2
    return 0
