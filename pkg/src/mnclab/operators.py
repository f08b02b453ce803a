"""Operators T: L_q -> L_p on a discretized space, and their derivatives.

Operators are small immutable objects built by the constructor functions
below (``power_superposition``, ``integral``, ``hammerstein``, ...).  Each
knows its domain exponent ``q`` and codomain exponent ``p``; applying an
operator to a function whose exponent is not ``q`` is an error.

``apply_values`` works on a (members, cells) array so whole samples are
mapped in one call; :func:`apply` and :func:`apply_set` wrap it.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidArgument, NonDifferentiable, NumericOverflow
from .sets import GeneratorSpec, SampleSet, scale_set, sphere_sample
from .space import Func, MeasureSpace, lp_norms

__all__ = [
    "Kernel",
    "OperatorSpec",
    "DerivativeSpec",
    "RemainderTable",
    "apply",
    "apply_set",
    "power_superposition",
    "canonical_f1",
    "general_superposition",
    "multiplier",
    "integral",
    "hammerstein",
    "identity",
    "zero_operator",
    "sum_op",
    "scalar_multiple",
    "norm_weighted",
    "shift_argument",
    "subtract_value",
    "frechet_analytic",
    "remainder_ratio",
    "asymptotic_remainder_ratio",
    "linear_part",
    "is_linear_numerically",
    "operator_from_dict",
]


def _same_exponent(a, b):
    return float(a) == float(b)


# -- kernels -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Kernel:
    """Dense kernel matrix k[s, t]; (K u)(s) = sum_t k[s, t] u(t) mu(t)."""

    matrix: np.ndarray
    description: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidArgument(f"kernel must be a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidArgument("kernel values must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not self.description:
            digest = hashlib.sha256(m.tobytes()).hexdigest()[:16]
            object.__setattr__(self, "description", {"generator": "dense", "shape": list(m.shape), "sha256": digest})

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def constant(cls, space: MeasureSpace, c: float = 1.0):
        n = space.cell_count
        return cls(np.full((n, n), float(c)), {"generator": "constant", "c": float(c)})

    @classmethod
    def gaussian(cls, space: MeasureSpace, width: float):
        if not width > 0:
            raise InvalidArgument("gaussian kernel width must be positive")
        n = space.cell_count
        x = (np.arange(n) + 0.5) / n
        diff = x[:, None] - x[None, :]
        m = np.exp(-0.5 * (diff / width) ** 2) / (width * math.sqrt(2 * math.pi))
        return cls(m, {"generator": "gaussian", "width": float(width)})

    @classmethod
    def rank_one(cls, space: MeasureSpace, phi=None, psi=None):
        n = space.cell_count
        phi_v = np.ones(n) if phi is None else np.asarray(getattr(phi, "values", phi), dtype=float)
        psi_v = np.ones(n) if psi is None else np.asarray(getattr(psi, "values", psi), dtype=float)
        if phi_v.shape != (n,) or psi_v.shape != (n,):
            raise InvalidArgument("rank-one factors must have one value per cell")
        desc = {
            "generator": "rank-one",
            "phi": "ones" if phi is None else phi_v.tolist(),
            "psi": "ones" if psi is None else psi_v.tolist(),
        }
        return cls(np.outer(phi_v, psi_v), desc)

    @classmethod
    def from_csv(cls, path):
        """Row-major matrix, one row per output cell, comma separated."""
        with open(path, newline="") as fh:
            rows = [[float(x) for x in r] for r in csv.reader(fh) if r]
        return cls(np.array(rows), {"generator": "csv", "path": str(path)})

    @classmethod
    def from_spec(cls, spec: Mapping, space: MeasureSpace) -> "Kernel":
        g = spec.get("generator")
        if g == "constant":
            k = cls.constant(space, spec.get("c", 1.0))
        elif g == "gaussian":
            k = cls.gaussian(space, spec["width"])
        elif g == "rank-one":
            phi, psi = spec.get("phi", "ones"), spec.get("psi", "ones")
            k = cls.rank_one(space, None if phi == "ones" else phi, None if psi == "ones" else psi)
        elif g == "csv":
            k = cls.from_csv(spec["path"])
        elif "matrix" in spec:
            k = cls(np.array(spec["matrix"]), {"generator": "matrix", "matrix": spec["matrix"]})
        else:
            raise InvalidArgument(f"unknown kernel spec {dict(spec)!r}")
        if k.size != space.cell_count:
            raise InvalidArgument(f"kernel is {k.size}x{k.size} but the space has {space.cell_count} cells")
        return k

    def weighted_columns(self, w: np.ndarray) -> "Kernel":
        """Kernel k[s, t] * w[t] (composition with a diagonal multiplier)."""
        return Kernel(self.matrix * w[None, :])


# -- operators -----------------------------------------------------------


class OperatorSpec:
    """Base class: a continuous operator L_q -> L_p."""

    kind = "abstract"
    q: float
    p: float

    def apply_values(self, V: np.ndarray, space: MeasureSpace) -> np.ndarray:
        raise NotImplementedError

    @property
    def linear(self) -> bool:
        return False

    @property
    def is_zero(self) -> bool:
        return False

    def declared_degree(self) -> float | None:
        """Degree k with T(rho u) scaling like rho^k memberwise, when known by construction."""
        return None

    def derivative_op(self, u1: Func) -> "OperatorSpec":
        raise NonDifferentiable(f"{self.kind} has no analytic derivative")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __call__(self, u: Func) -> Func:
        return apply(self, u)

    def __add__(self, other):
        return sum_op(self, other)

    def __rmul__(self, c):
        return scalar_multiple(c, self)

    def __repr__(self):
        return f"<{self.kind} L_{self.q:g} -> L_{self.p:g}>"


def _finite_or_raise(out: np.ndarray, what: str) -> np.ndarray:
    bad = ~np.isfinite(out)
    if bad.any():
        row, cell = np.argwhere(bad)[0]
        raise NumericOverflow(f"{what} produced a non-finite value at cell {int(cell)} (member {int(row)})", int(cell))
    return out


def apply(T: OperatorSpec, u: Func) -> Func:
    if not _same_exponent(u.p, T.q):
        raise InvalidArgument(f"{T.kind} expects an L_{T.q:g} argument, got L_{u.p:g}")
    out = T.apply_values(u.values[None, :], u.space)
    return Func(u.space, _finite_or_raise(out, T.kind)[0], T.p)


def apply_set(T: OperatorSpec, U: SampleSet) -> SampleSet:
    """Image of every member, in member order."""
    if not _same_exponent(U.p, T.q):
        raise InvalidArgument(f"{T.kind} expects an L_{T.q:g} sample, got L_{U.p:g}")
    out = _finite_or_raise(T.apply_values(U.values, U.space), T.kind)
    return SampleSet(U.space, T.p, out, GeneratorSpec("image", {"operator": T.to_dict()}, (U.provenance,)))


@dataclass(frozen=True, eq=False, repr=False)
class _PowerSuperposition(OperatorSpec):
    a: float
    gamma: float
    q: float
    p: float
    tag: str | None = None
    kind = "power_superposition"

    def apply_values(self, V, space):
        if self.a == 0:
            return np.zeros_like(V)
        if self.gamma == 1:
            return self.a * V
        if self.gamma == 2:
            return self.a * (V * np.abs(V))
        with np.errstate(over="ignore"):
            return self.a * np.sign(V) * np.power(np.abs(V), self.gamma)

    @property
    def linear(self):
        return self.a == 0 or self.gamma == 1

    @property
    def is_zero(self):
        return self.a == 0

    def declared_degree(self):
        return None if self.a == 0 else self.gamma

    def derivative_op(self, u1):
        if self.a == 0:
            return zero_operator(self.q, self.p)
        x = np.abs(u1.values)
        if self.gamma < 1:
            zeros = np.flatnonzero(x == 0)
            if zeros.size:
                raise NonDifferentiable(
                    f"a*sgn(u)|u|^{self.gamma:g} is not differentiable where the anchor vanishes (cell {int(zeros[0])})",
                    int(zeros[0]),
                )
        if self.gamma == 1:
            return multiplier(np.full(x.size, self.a), self.q, self.p)
        return multiplier(self.a * self.gamma * np.power(x, self.gamma - 1), self.q, self.p)

    def to_dict(self):
        d = {"kind": self.kind, "a": self.a, "gamma": self.gamma, "q": self.q, "p": self.p}
        if self.tag:
            d["tag"] = self.tag
        return d


def power_superposition(a: float, gamma: float, q: float = 2.0, p: float = 2.0, tag: str | None = None):
    """u -> a * sgn(u(s)) |u(s)|^gamma, with sgn(0) = 0.

    Tagging the operator ``"canonical-F1"`` enforces gamma == q/p.
    """
    if not (math.isfinite(a) and a >= 0):
        raise InvalidArgument(f"amplitude a must be finite and >= 0, got {a!r}")
    if not (math.isfinite(gamma) and gamma > 0):
        raise InvalidArgument(f"power gamma must be positive, got {gamma!r}")
    if tag == "canonical-F1" and abs(gamma - q / p) > 1e-15 * max(1.0, q / p):
        raise InvalidArgument(f"F1 must use gamma = q/p = {q / p:g}, got {gamma!r}")
    return _PowerSuperposition(float(a), float(gamma), float(q), float(p), tag)


def canonical_f1(a: float, q: float, p: float):
    """The canonical comparison operator F1(u) = a sgn(u)|u|^(q/p): L_q -> L_p."""
    return power_superposition(a, q / p, q, p, tag="canonical-F1")


@dataclass(frozen=True, eq=False, repr=False)
class _GeneralSuperposition(OperatorSpec):
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None
    q: float
    p: float
    name: str
    weights: np.ndarray | None = None
    dfn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    kind = "general_superposition"

    def apply_values(self, V, space):
        if self.weights is not None:
            if self.weights.size != V.shape[1]:
                raise InvalidArgument("multiplier length does not match the cell count")
            return V * self.weights
        cells = np.arange(V.shape[1])
        return np.asarray(self.fn(V, cells), dtype=float)

    @property
    def linear(self):
        return self.weights is not None

    @property
    def is_zero(self):
        return self.weights is not None and not np.any(self.weights)

    def declared_degree(self):
        return 1.0 if self.weights is not None and not self.is_zero else None

    def derivative_op(self, u1):
        if self.weights is not None:
            return self
        if self.dfn is None:
            raise NonDifferentiable(f"superposition {self.name!r} was given no derivative")
        cells = np.arange(u1.values.size)
        return multiplier(np.asarray(self.dfn(u1.values, cells), dtype=float), self.q, self.p)

    def to_dict(self):
        d = {"kind": self.kind, "name": self.name, "q": self.q, "p": self.p}
        if self.weights is not None:
            d["multiplier"] = self.weights.tolist()
        return d


def general_superposition(fn, q=2.0, p=2.0, name="g", derivative=None):
    """u -> g(s, u(s)); `fn(values, cells)` works on (members, cells) arrays."""
    return _GeneralSuperposition(fn, float(q), float(p), name, None, derivative)


def multiplier(weights, q=2.0, p=2.0):
    """Linear diagonal operator u -> w(s) u(s)."""
    w = np.array(weights, dtype=float, copy=True)
    w.setflags(write=False)
    return _GeneralSuperposition(None, float(q), float(p), "multiplier", w)


@dataclass(frozen=True, eq=False, repr=False)
class _Integral(OperatorSpec):
    kernel: Kernel
    q: float
    p: float
    kind = "integral"

    def apply_values(self, V, space):
        if self.kernel.size != V.shape[1]:
            raise InvalidArgument(f"kernel is {self.kernel.size}x{self.kernel.size}, argument has {V.shape[1]} cells")
        return (V * space.measures) @ self.kernel.matrix.T

    @property
    def linear(self):
        return True

    @property
    def is_zero(self):
        return not np.any(self.kernel.matrix)

    def declared_degree(self):
        return None if self.is_zero else 1.0

    def derivative_op(self, u1):
        return self

    def to_dict(self):
        return {"kind": self.kind, "kernel": dict(self.kernel.description), "q": self.q, "p": self.p}


def integral(kernel: Kernel, q: float = 2.0, p: float | None = None):
    return _Integral(kernel, float(q), float(q if p is None else p))


@dataclass(frozen=True, eq=False, repr=False)
class _Hammerstein(OperatorSpec):
    kernel: Kernel
    outer: _PowerSuperposition
    kind = "hammerstein"

    @property
    def q(self):
        return self.outer.q

    @property
    def p(self):
        return self.outer.p

    def apply_values(self, V, space):
        W = self.outer.apply_values(V, space)
        if self.kernel.size != V.shape[1]:
            raise InvalidArgument("kernel size does not match the cell count")
        return (W * space.measures) @ self.kernel.matrix.T

    @property
    def linear(self):
        return self.outer.linear

    @property
    def is_zero(self):
        return self.outer.is_zero or not np.any(self.kernel.matrix)

    def declared_degree(self):
        return None if self.is_zero else self.outer.gamma

    def derivative_op(self, u1):
        inner = self.outer.derivative_op(u1)
        if inner.is_zero:
            return zero_operator(self.q, self.p)
        return integral(self.kernel.weighted_columns(np.asarray(inner.weights)), self.q, self.p)

    def to_dict(self):
        return {
            "kind": self.kind,
            "kernel": dict(self.kernel.description),
            "a": self.outer.a,
            "gamma": self.outer.gamma,
            "q": self.q,
            "p": self.p,
        }


def hammerstein(kernel: Kernel, a: float = 1.0, gamma: float = 1.0, q: float = 2.0, p: float = 2.0):
    """K composed after the power superposition a sgn(u)|u|^gamma."""
    return _Hammerstein(kernel, power_superposition(a, gamma, q, p))


@dataclass(frozen=True, eq=False, repr=False)
class _Identity(OperatorSpec):
    q: float
    kind = "identity"

    @property
    def p(self):
        return self.q

    def apply_values(self, V, space):
        return V.copy()

    @property
    def linear(self):
        return True

    def declared_degree(self):
        return 1.0

    def derivative_op(self, u1):
        return self

    def to_dict(self):
        return {"kind": self.kind, "q": self.q, "p": self.p}


def identity(p: float = 2.0):
    return _Identity(float(p))


def zero_operator(q: float = 2.0, p: float | None = None):
    return power_superposition(0.0, 1.0, q, q if p is None else p)


def _check_pair(T1, T2):
    if not (_same_exponent(T1.q, T2.q) and _same_exponent(T1.p, T2.p)):
        raise InvalidArgument(
            f"exponent mismatch: L_{T1.q:g}->L_{T1.p:g} vs L_{T2.q:g}->L_{T2.p:g}"
        )


@dataclass(frozen=True, eq=False, repr=False)
class _Sum(OperatorSpec):
    first: OperatorSpec
    second: OperatorSpec
    kind = "sum"

    @property
    def q(self):
        return self.first.q

    @property
    def p(self):
        return self.first.p

    def apply_values(self, V, space):
        return self.first.apply_values(V, space) + self.second.apply_values(V, space)

    @property
    def linear(self):
        return self.first.linear and self.second.linear

    @property
    def is_zero(self):
        return self.first.is_zero and self.second.is_zero

    def declared_degree(self):
        if self.first.is_zero:
            return self.second.declared_degree()
        if self.second.is_zero:
            return self.first.declared_degree()
        k1, k2 = self.first.declared_degree(), self.second.declared_degree()
        return k1 if k1 is not None and k1 == k2 else None

    def derivative_op(self, u1):
        return sum_op(self.first.derivative_op(u1), self.second.derivative_op(u1))

    def terms(self) -> list[OperatorSpec]:
        out = []
        for t in (self.first, self.second):
            out.extend(t.terms() if isinstance(t, _Sum) else [t])
        return out

    def to_dict(self):
        return {"kind": self.kind, "children": [self.first.to_dict(), self.second.to_dict()]}


def sum_op(T1: OperatorSpec, T2: OperatorSpec):
    _check_pair(T1, T2)
    return _Sum(T1, T2)


@dataclass(frozen=True, eq=False, repr=False)
class _ScalarMultiple(OperatorSpec):
    c: float
    inner: OperatorSpec
    kind = "scalar_multiple"

    @property
    def q(self):
        return self.inner.q

    @property
    def p(self):
        return self.inner.p

    def apply_values(self, V, space):
        if self.c == 0:
            return np.zeros((V.shape[0], V.shape[1]))
        return self.c * self.inner.apply_values(V, space)

    @property
    def linear(self):
        return self.c == 0 or self.inner.linear

    @property
    def is_zero(self):
        return self.c == 0 or self.inner.is_zero

    def declared_degree(self):
        return None if self.is_zero else self.inner.declared_degree()

    def derivative_op(self, u1):
        return scalar_multiple(self.c, self.inner.derivative_op(u1))

    def to_dict(self):
        return {"kind": self.kind, "c": self.c, "children": [self.inner.to_dict()]}


def scalar_multiple(c: float, T: OperatorSpec):
    return _ScalarMultiple(float(c), T)


@dataclass(frozen=True, eq=False, repr=False)
class _NormWeighted(OperatorSpec):
    alpha: float
    inner: OperatorSpec
    kind = "norm_weighted"

    @property
    def q(self):
        return self.inner.q

    @property
    def p(self):
        return self.inner.p

    def apply_values(self, V, space):
        n = lp_norms(V, space.measures, self.q)
        if self.alpha == 0:
            w = np.ones_like(n)
        else:
            # convention: ||0||^alpha := 0 for alpha < 0 (the image of 0 is 0)
            safe = np.where(n > 0, n, 1.0)
            w = np.where(n > 0, np.power(safe, self.alpha), 0.0)
        return w[:, None] * self.inner.apply_values(V, space)

    @property
    def linear(self):
        return self.alpha == 0 and self.inner.linear

    @property
    def is_zero(self):
        return self.inner.is_zero

    def declared_degree(self):
        k = self.inner.declared_degree()
        return None if k is None else k + self.alpha

    def derivative_op(self, u1):
        n = lp_norms(u1.values[None, :], u1.space.measures, self.q)[0]
        Dg = self.inner.derivative_op(u1)
        if n == 0:
            if self.alpha > 0:
                return zero_operator(self.q, self.p)
            if self.alpha == 0:
                return Dg
            raise NonDifferentiable("||u||^alpha with alpha < 0 is not differentiable at 0")
        if self.q == 1:
            zeros = np.flatnonzero(u1.values == 0)
            if zeros.size:
                raise NonDifferentiable(f"the L_1 norm is not differentiable where the anchor vanishes (cell {int(zeros[0])})", int(zeros[0]))
        g1 = self.inner.apply_values(u1.values[None, :], u1.space)[0]
        dn = np.abs(u1.values) ** (self.q - 1) * np.sign(u1.values) / n ** (self.q - 1)
        head = scalar_multiple(n**self.alpha, Dg)
        if self.alpha == 0:
            return head
        w = self.alpha * n ** (self.alpha - 1) * dn
        return sum_op(head, integral(Kernel(np.outer(g1, w)), self.q, self.p))

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "children": [self.inner.to_dict()]}


def norm_weighted(alpha: float, inner: OperatorSpec | None = None):
    """u -> ||u||_q^alpha * inner(u); identity inner by default."""
    return _NormWeighted(float(alpha), identity() if inner is None else inner)


@dataclass(frozen=True, eq=False, repr=False)
class _ShiftArgument(OperatorSpec):
    inner: OperatorSpec
    anchor: Func
    kind = "shift_argument"

    @property
    def q(self):
        return self.inner.q

    @property
    def p(self):
        return self.inner.p

    def apply_values(self, V, space):
        return self.inner.apply_values(V + self.anchor.values, space)

    @property
    def is_zero(self):
        return self.inner.is_zero

    def derivative_op(self, u1):
        return self.inner.derivative_op(u1 + self.anchor)

    def to_dict(self):
        return {"kind": self.kind, "anchor": self.anchor.values.tolist(), "children": [self.inner.to_dict()]}


def shift_argument(T: OperatorSpec, anchor: Func):
    """u -> T(anchor + u)."""
    if not _same_exponent(anchor.p, T.q):
        raise InvalidArgument("anchor must live in the operator's domain")
    return _ShiftArgument(T, anchor)


@dataclass(frozen=True, eq=False, repr=False)
class _SubtractValue(OperatorSpec):
    inner: OperatorSpec
    value: Func
    kind = "subtract_value"

    @property
    def q(self):
        return self.inner.q

    @property
    def p(self):
        return self.inner.p

    def apply_values(self, V, space):
        return self.inner.apply_values(V, space) - self.value.values

    def derivative_op(self, u1):
        return self.inner.derivative_op(u1)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value.values.tolist(), "children": [self.inner.to_dict()]}


def subtract_value(T: OperatorSpec, value: Func):
    """u -> T(u) - value."""
    if not _same_exponent(value.p, T.p):
        raise InvalidArgument("subtracted value must live in the operator's codomain")
    return _SubtractValue(T, value)


# -- derivatives ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DerivativeSpec:
    """Analytic derivative of `base` at `anchor` (a Func, or "infinity")."""

    base: OperatorSpec
    anchor: Any
    linear_op: OperatorSpec

    def apply(self, h: Func) -> Func:
        return apply(self.linear_op, h)

    def remainder(self, U: SampleSet) -> np.ndarray:
        """omega(u) = f(u1 + u) - f(u1) - f'(u1) u for each member (rows)."""
        if self.anchor == "infinity":
            return self.base.apply_values(U.values, U.space) - self.linear_op.apply_values(U.values, U.space)
        u1 = self.anchor.values
        f1 = self.base.apply_values(u1[None, :], U.space)
        return (
            self.base.apply_values(U.values + u1, U.space)
            - f1
            - self.linear_op.apply_values(U.values, U.space)
        )


def frechet_analytic(T: OperatorSpec, u1: Func) -> DerivativeSpec:
    if not _same_exponent(u1.p, T.q):
        raise InvalidArgument("anchor must live in the operator's domain")
    return DerivativeSpec(T, u1, T.derivative_op(u1))


def linear_part(T: OperatorSpec) -> OperatorSpec:
    """The linear summands of a sum (the candidate asymptotic derivative)."""
    if T.linear:
        return T
    terms = T.terms() if isinstance(T, _Sum) else [T]
    lin = [t for t in terms if t.linear]
    if not lin:
        raise InvalidArgument("no linear summand to use as the asymptotic derivative")
    out = lin[0]
    for t in lin[1:]:
        out = sum_op(out, t)
    return out


@dataclass(frozen=True)
class RemainderTable:
    radii: tuple[float, ...]
    ratios: tuple[float, ...]
    mode: str

    def decays(self, tol: float = 1e-9) -> bool:
        """Remainder ratios tend to 0 along the grid (last below half the first, or all ~0).

        `tol` is a roundoff floor: for linear maps the ratio is pure cancellation
        error, which grows like eps / r as the radius shrinks.
        """
        r = self.ratios
        return max(r) <= tol or r[-1] <= 0.5 * r[0]

    def table(self) -> dict:
        return {"columns": ["radius", "remainder_ratio"], "rows": [[a, b] for a, b in zip(self.radii, self.ratios)]}

    def to_dict(self):
        return {"mode": self.mode, "radii": list(self.radii), "ratios": list(self.ratios), "decays": self.decays()}


def _unit_sphere(space, q, samples):
    if samples is None:
        return sphere_sample(space, q, 1.0, 32, seed=0, mixture={"smooth": 1.0, "uniform": 1.0})
    return samples


def _ratio_rows(omega: np.ndarray, U: SampleSet, p: float) -> float:
    num = lp_norms(omega, U.space.measures, p)
    den = U.norms()
    keep = den > 0
    return float(np.max(num[keep] / den[keep])) if keep.any() else 0.0


def remainder_ratio(T: OperatorSpec, u1: Func, radii: Sequence[float], samples: SampleSet | None = None) -> RemainderTable:
    """sup ||omega(u)|| / ||u|| over ||u|| = r, for each r in `radii`.

    `samples` is a unit-sphere sample; radius r uses its memberwise r-multiple.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise InvalidArgument("radii must be positive")
    D = frechet_analytic(T, u1)
    base = _unit_sphere(u1.space, T.q, samples)
    ratios = [_ratio_rows(D.remainder(scale_set(base, r)), scale_set(base, r), T.p) for r in radii]
    return RemainderTable(tuple(radii), tuple(ratios), "point")


def asymptotic_remainder_ratio(
    T: OperatorSpec,
    radii: Sequence[float],
    samples: SampleSet,
    linear: OperatorSpec | None = None,
) -> RemainderTable:
    """sup ||T(u) - L u|| / ||u|| over ||u|| = R for increasing R."""
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise InvalidArgument("radii must be positive")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidArgument("radii must be strictly increasing for the asymptotic remainder")
    L = linear_part(T) if linear is None else linear
    D = DerivativeSpec(T, "infinity", L)
    ratios = [_ratio_rows(D.remainder(scale_set(samples, R)), scale_set(samples, R), T.p) for R in radii]
    return RemainderTable(tuple(radii), tuple(ratios), "infinity")


def is_linear_numerically(T: OperatorSpec, space: MeasureSpace, trials: int = 3, seed: int = 12345, rtol: float = 1e-10) -> bool:
    """Check T(a f + b g) = a T(f) + b T(g) on random draws."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = space.cell_count
    for _ in range(trials):
        f, g = 2 * rng.random(n) - 1, 2 * rng.random(n) - 1
        a, b = 4 * rng.random() - 2, 4 * rng.random() - 2
        V = np.array([a * f + b * g, f, g])
        out = T.apply_values(V, space)
        lhs, rhs = out[0], a * out[1] + b * out[2]
        scale = max(np.abs(lhs).max(), np.abs(rhs).max(), 1e-300)
        if np.abs(lhs - rhs).max() > rtol * scale:
            return False
    return True


# -- config round trip ---------------------------------------------------


def operator_from_dict(d: Mapping, space: MeasureSpace, resolve: Callable[[str], OperatorSpec] | None = None) -> OperatorSpec:
    """Build an operator from its nested dict description.

    A string child (or ``{"ref": name}``) is resolved through `resolve`.
    """

    def child(c):
        if isinstance(c, str):
            if resolve is None:
                raise InvalidArgument(f"unresolved operator reference {c!r}")
            return resolve(c)
        if "ref" in c:
            return child(c["ref"])
        return operator_from_dict(c, space, resolve)

    kind = d.get("kind")
    q = float(d.get("q", 2.0))
    p = float(d.get("p", q))
    kids = d.get("children", [])
    if kind == "power_superposition":
        return power_superposition(float(d.get("a", 1.0)), float(d["gamma"]), q, p, d.get("tag"))
    if kind == "f1":
        return canonical_f1(float(d.get("a", 1.0)), q, p)
    if kind == "general_superposition":
        if "multiplier" not in d:
            raise InvalidArgument("only multiplier-form general superpositions can be configured")
        return multiplier(d["multiplier"], q, p)
    if kind == "integral":
        return integral(Kernel.from_spec(d["kernel"], space), q, p)
    if kind == "hammerstein":
        return hammerstein(Kernel.from_spec(d["kernel"], space), float(d.get("a", 1.0)), float(d.get("gamma", 1.0)), q, p)
    if kind == "identity":
        return identity(q)
    if kind == "zero":
        return zero_operator(q, p)
    if kind == "sum":
        if len(kids) < 2:
            raise InvalidArgument("sum needs at least two children")
        out = child(kids[0])
        for c in kids[1:]:
            out = sum_op(out, child(c))
        return out
    if kind == "scalar_multiple":
        return scalar_multiple(float(d["c"]), child(kids[0]))
    if kind == "norm_weighted":
        inner = child(kids[0]) if kids else identity(q)
        return norm_weighted(float(d["alpha"]), inner)
    if kind == "shift_argument":
        inner = child(kids[0])
        return shift_argument(inner, _func_param(d["anchor"], space, inner.q))
    if kind == "subtract_value":
        inner = child(kids[0])
        return subtract_value(inner, _func_param(d["value"], space, inner.p))
    raise InvalidArgument(f"unknown operator kind {kind!r}")


def _func_param(v, space, p):
    if isinstance(v, (int, float)):
        return Func(space, np.full(space.cell_count, float(v)), p)
    return Func(space, np.asarray(v, dtype=float), p)
