"""States: partial valuations assigning reference values to quantities.

Three realizations are provided: classical point states on the diagonal
algebra, Copenhagen states (defined only on quantities having the state
vector as an eigenvector) and ensemble states (expectations). On top of
them sit the sharpness rules, spectrum checks, the four-quantity no-go
enumeration and the sharp Bell bound.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .ensembles import Ensemble, PureEnsemble, ensemble_from_json
from .errors import ContextMismatchError, NoncommutingError, ParseError, PreconditionError
from .qalgebra import (
    AlgebraContext,
    Quantity,
    commutator,
    complex_list_from_json,
    complex_list_to_json,
    context_from_json,
    hermitian_defect,
    is_hermitian,
    mul,
    spectral_norm,
)

EIGEN_TOL = 1e-9  # Copenhagen definedness, relative to max(1, |f|)
REAL_TOL = 1e-10
SHARP_TOL = 1e-9
COMMUTE_TOL = 1e-10
MAX_CONDITION = 1e8
MAX_CLOSURE = 64


# ---------------------------------------------------------------- undefined value

class _Undefined:
    """The unspecified value ``?``: absorbs arithmetic except ``0 * ? = 0``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "?"

    def __bool__(self):
        return False

    def _absorb(self, other):
        return self

    __add__ = __radd__ = __sub__ = __rsub__ = _absorb
    __truediv__ = __rtruediv__ = __pow__ = _absorb

    def __mul__(self, other):
        if not isinstance(other, _Undefined) and other == 0:
            return 0
        return self

    __rmul__ = __mul__

    def __neg__(self):
        return self

    def __abs__(self):
        return self


UNDEFINED = _Undefined()


def is_defined(x) -> bool:
    return x is not UNDEFINED


# ---------------------------------------------------------------- valuations

class Valuation:
    kind = ""

    def __init__(self, ctx: AlgebraContext):
        self.ctx = ctx

    def _value(self, f: Quantity):
        raise NotImplementedError

    def __call__(self, f):
        return value(self, f)

    def to_json(self) -> dict:
        raise NotImplementedError


class ClassicalPoint(Valuation):
    """``v(f) = f[omega]`` on the diagonal algebra.

    The continuity requirement of a point evaluation is vacuous on a finite
    set, so every quantity has a value.
    """

    kind = "classical_point"

    def __init__(self, ctx: AlgebraContext, omega: int):
        if not ctx.is_diagonal:
            raise PreconditionError("classical point states live on the diagonal algebra")
        if not 0 <= int(omega) < ctx.dim:
            raise PreconditionError(f"omega = {omega} out of range for dimension {ctx.dim}")
        super().__init__(ctx)
        self.omega = int(omega)

    def _value(self, f):
        return complex(f.data[self.omega])

    def to_json(self):
        return {"kind": self.kind, "ctx": self.ctx.to_json(), "omega": self.omega}


class Copenhagen(Valuation):
    """``v(f) = lambda`` if ``f psi = lambda psi`` (numerically), else ``?``."""

    kind = "copenhagen"

    def __init__(self, ctx: AlgebraContext, psi):
        if ctx.is_diagonal:
            raise PreconditionError("Copenhagen states need the matrix algebra")
        v = np.asarray(psi, dtype=complex).reshape(-1)
        if v.shape != (ctx.dim,):
            raise PreconditionError(f"psi must have length {ctx.dim}, got {v.shape[0]}")
        norm = np.linalg.norm(v)
        if not norm > 0:
            raise PreconditionError("psi must be nonzero")
        super().__init__(ctx)
        self.psi = v / norm
        self.psi.setflags(write=False)
        self.last_diagnostic = ""

    def _value(self, f):
        fpsi = f.data @ self.psi
        lam = complex(np.vdot(self.psi, fpsi))
        residual = float(np.linalg.norm(fpsi - lam * self.psi))
        threshold = EIGEN_TOL * max(1.0, spectral_norm(f))
        if residual > threshold:
            self.last_diagnostic = (
                f"psi is not an eigenvector: |f psi - lambda psi| = {residual:.3g} > {threshold:.3g}"
            )
            return UNDEFINED
        return lam

    def to_json(self):
        return {"kind": self.kind, "ctx": self.ctx.to_json(), "psi": complex_list_to_json(self.psi)}


class EnsembleState(Valuation):
    """``v(f) = <f>``; defined everywhere, linear and monotone."""

    kind = "ensemble"

    def __init__(self, E: Ensemble):
        super().__init__(E.ctx)
        self.E = E

    def _value(self, f):
        return complex(self.E(f))

    def to_json(self):
        return {"kind": self.kind, "ensemble": self.E.to_json()}


def value(v: Valuation, f):
    """Reference value of f in state v; a float for Hermitian f, else complex or ``?``."""
    if isinstance(f, (int, float, complex, np.number)):
        return complex(f)
    if not v.ctx.same_algebra(f.ctx):
        raise ContextMismatchError(f"state lives on {v.ctx.kind}({v.ctx.dim}), quantity on {f.ctx.kind}({f.ctx.dim})")
    out = v._value(f)
    if out is UNDEFINED:
        return out
    if is_hermitian(f):
        if abs(out.imag) > REAL_TOL * max(1.0, abs(out.real)):
            raise PreconditionError(f"value of a Hermitian quantity has imaginary part {out.imag:.3g}")
        return float(out.real)
    return out


def valuation_from_json(obj: Any, tol: float | None = None) -> Valuation:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("state must be a JSON object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "ensemble":
            if "ensemble" not in obj:
                raise ParseError("ensemble state is missing field 'ensemble'")
            return EnsembleState(ensemble_from_json(obj["ensemble"], tol))
        if "ctx" not in obj:
            raise ParseError(f"{kind} state is missing field 'ctx'")
        ctx = context_from_json(obj["ctx"], tol)
        if kind == "classical_point":
            omega = obj.get("omega")
            if not isinstance(omega, int) or isinstance(omega, bool):
                raise ParseError(f"omega must be an integer, got {omega!r}")
            return ClassicalPoint(ctx, omega)
        if kind == "copenhagen":
            return Copenhagen(ctx, complex_list_from_json(obj.get("psi"), ctx.dim, "psi"))
    except PreconditionError as exc:
        raise ParseError(str(exc)) from None
    raise ParseError(f"unknown state kind {kind!r}; expected classical_point, copenhagen or ensemble")


# ---------------------------------------------------------------- sharpness

@dataclass
class SharpnessReport:
    residuals: dict[str, float]
    witnesses: list[tuple[str, tuple[str, ...], float]]
    closure_depth: int
    set_size: int
    truncated: bool

    @property
    def verdict(self) -> bool:
        return all(r <= SHARP_TOL for r in self.residuals.values())

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "residuals": {k: _finite_or_str(r) for k, r in self.residuals.items()},
            "witnesses": [{"rule": rule, "quantities": list(labels), "residual": _finite_or_str(r)}
                          for rule, labels, r in self.witnesses],
            "closure_depth": self.closure_depth,
            "set_size": self.set_size,
            "truncated": self.truncated,
        }


SHARP_RULES = ("real_values", "squares", "inverses", "commuting_sums", "products", "affine")


def _finite_or_str(x: float):
    return x if math.isfinite(x) else "undefined"


def _herm(q: Quantity) -> Quantity:
    if q.ctx.is_diagonal:
        return Quantity(q.ctx, q.data.real.astype(complex))
    return Quantity(q.ctx, (q.data + q.data.conj().T) / 2)


def _commute(f: Quantity, g: Quantity) -> bool:
    return spectral_norm(commutator(f, g)) <= COMMUTE_TOL * max(1.0, spectral_norm(f) * spectral_norm(g))


def _inverse(f: Quantity) -> Quantity | None:
    if f.ctx.is_diagonal:
        a = np.abs(f.data)
        if a.min() == 0 or a.max() / a.min() > MAX_CONDITION:
            return None
        return Quantity(f.ctx, 1 / f.data)
    if np.linalg.cond(f.data) > MAX_CONDITION:
        return None
    return _herm(Quantity(f.ctx, np.linalg.inv(f.data)))


def _close(members: list[tuple[str, Quantity]], depth: int) -> tuple[list[tuple[str, Quantity]], bool]:
    """Close under squares, inverses and sums/differences of commuting pairs."""
    out = list(members)
    truncated = False

    def key(q):
        return (np.round(q.data, 10) + 0.0).tobytes()  # + 0.0 folds -0.0 into 0.0

    seen = {key(q) for _, q in out}

    for _ in range(depth):
        fresh = []
        for label, f in out:
            fresh.append((f"({label})^2", _herm(mul(f, f))))
            inv = _inverse(f)
            if inv is not None:
                fresh.append((f"({label})^-1", inv))
        for (lf, f), (lg, g) in itertools.combinations(out, 2):
            if _commute(f, g):
                fresh.append((f"{lf}+{lg}", f + g))
                fresh.append((f"{lf}-{lg}", f - g))
        added = False
        for item in fresh:
            if len(out) >= MAX_CLOSURE:
                truncated = True
                break
            k = key(item[1])
            if k not in seen:
                seen.add(k)
                out.append(item)
                added = True
        if truncated or not added:
            break
    return out, truncated


def _gap(a, b) -> float:
    """Relative mismatch of two values; infinite when either is undefined."""
    if not (is_defined(a) and is_defined(b)):
        return math.inf
    return abs(a - b) / max(1.0, abs(a), abs(b))


def check_sharpness(v: Valuation, quantities, closure_depth: int = 2,
                    labels: list[str] | None = None) -> SharpnessReport:
    """Evaluate the sharpness rules on the closure of a finite set.

    Rules: real values for every member, ``v(f^2) = v(f)^2``,
    ``v(f^-1) = v(f)^-1`` for invertible f, ``v(f + l g) = v(f) + l v(g)``
    for commuting pairs, and the derived rules ``v(fg) = v(f) v(g)``
    (commuting) and ``v(a + b f) = a + b v(f)`` (real a, b). Residuals are
    relative to ``max(1, |lhs|, |rhs|)``. Only the scalars reachable by the
    closure are materialized, not the whole real line.
    """
    quantities = list(quantities)
    for k, f in enumerate(quantities):
        if hermitian_defect(f) > REAL_TOL * max(1.0, spectral_norm(f)):
            raise PreconditionError(f"member {k} is not Hermitian")
    labels = labels or [f"f{k + 1}" for k in range(len(quantities))]
    members, truncated = _close([(l, _herm(f)) for l, f in zip(labels, quantities)], closure_depth)

    residuals = dict.fromkeys(SHARP_RULES, 0.0)
    witnesses: list[tuple[str, tuple[str, ...], float]] = []

    def note(rule, names, r):
        residuals[rule] = max(residuals[rule], r)
        if r > SHARP_TOL:
            witnesses.append((rule, names, r))

    vals = [value(v, f) for _, f in members]
    for (label, f), vf in zip(members, vals):
        note("real_values", (label,), 0.0 if is_defined(vf) else math.inf)
        note("squares", (label,), _gap(value(v, mul(f, f)), vf * vf))
        inv = _inverse(f)
        if inv is not None:
            if is_defined(vf) and vf != 0:
                note("inverses", (label,), _gap(value(v, inv), 1 / vf))
            else:
                note("inverses", (label,), math.inf)
        for a, b in ((1.5, -2.0),):
            note("affine", (label,), _gap(value(v, a + b * f), a + b * vf))
    for i, j in itertools.combinations(range(len(members)), 2):
        (lf, f), (lg, g) = members[i], members[j]
        if not _commute(f, g):
            continue
        vf, vg = vals[i], vals[j]
        for lam in (1.0, -1.0, math.sqrt(2)):
            note("commuting_sums", (lf, lg), _gap(value(v, f + lam * g), vf + lam * vg))
        note("products", (lf, lg), _gap(value(v, _herm(mul(f, g))), vf * vg))
    return SharpnessReport(residuals, witnesses, closure_depth, len(members), truncated)


@dataclass
class SpectrumReport:
    value: float
    distance: float  # smallest singular value of v(f) - f
    member: bool
    is_event: bool
    dichotomic: bool | None  # v(f) in {0, 1}; None unless f is an event


def spectrum_membership(v: Valuation, f: Quantity) -> SpectrumReport:
    """Check that a sharp value is an eigenvalue (and 0 or 1 for events)."""
    if not is_hermitian(f):
        raise PreconditionError("spectrum membership needs a Hermitian quantity")
    vf = value(v, f)
    if not is_defined(vf):
        raise PreconditionError("f has no value in this state")
    report = check_sharpness(v, [f])
    if not report.verdict:
        raise PreconditionError(f"f is not sharp in this state: {report.witnesses[0]}")
    shifted = vf - f
    if f.ctx.is_diagonal:
        dist = float(np.min(np.abs(shifted.data)))
    else:
        dist = float(np.linalg.svd(shifted.data, compute_uv=False)[-1])
    event = spectral_norm(mul(f, f) - f) <= REAL_TOL
    dichotomic = min(abs(vf), abs(vf - 1)) <= SHARP_TOL if event else None
    return SpectrumReport(vf, dist, dist <= 1e-8 * max(1.0, spectral_norm(f)), event, dichotomic)


# ---------------------------------------------------------------- no-go and Bell

@dataclass
class MerminPeresResult:
    relations_ok: bool
    consistent_assignments: int
    residuals: dict[str, float] = field(default_factory=dict)
    sign: int | None = None  # s with f1 f4 f2 f3 = s f1 f2 f3 f4, None if neither holds

    def to_json(self) -> dict:
        return {"relations_ok": self.relations_ok, "consistent_assignments": self.consistent_assignments,
                "sign": self.sign, "residuals": self.residuals}


def mermin_peres_nogo(f1: Quantity, f2: Quantity, f3: Quantity, f4: Quantity,
                      tol: float = 1e-10) -> MerminPeresResult:
    """Count the sign assignments compatible with the product rule.

    The relations are ``f_j^2 = 1``, anticommutation for ``j - k = +-2`` and
    commutation otherwise. A sharp state would give ``v_j = +-1`` and, by the
    product rule along ``(f1 f2)(f3 f4)`` and ``(f1 f4)(f2 f3)``,
    ``v1 v4 v2 v3 = s v1 v2 v3 v4`` where ``f1 f4 f2 f3 = s f1 f2 f3 f4``.
    """
    fs = (f1, f2, f3, f4)
    res: dict[str, float] = {}
    for j, f in enumerate(fs, 1):
        res[f"f{j}^2-1"] = spectral_norm(mul(f, f) - 1)
    for j, k in itertools.combinations(range(4), 2):
        fj, fk = fs[j], fs[k]
        if k - j == 2:
            res[f"{{f{j + 1},f{k + 1}}}"] = spectral_norm(mul(fj, fk) + mul(fk, fj))
        else:
            res[f"[f{j + 1},f{k + 1}]"] = spectral_norm(commutator(fj, fk))
    relations_ok = all(r <= tol for r in res.values())

    grouped_a = mul(mul(f1, f2), mul(f3, f4))
    grouped_b = mul(mul(f1, f4), mul(f2, f3))
    minus, plus = spectral_norm(grouped_b + grouped_a), spectral_norm(grouped_b - grouped_a)
    res["f1f4f2f3+f1f2f3f4"] = minus
    sign = -1 if minus <= tol else (1 if plus <= tol else None)

    count = 0
    for v1, v2, v3, v4 in itertools.product((-1, 1), repeat=4):
        if sign is None or v1 * v4 * v2 * v3 == sign * v1 * v2 * v3 * v4:
            count += 1
    return MerminPeresResult(relations_ok, count, res, sign)


ODD_PAIRS = ((0, 1), (1, 2), (2, 3), (0, 3))


def sharp_bell(v: Valuation, f1: Quantity, f2: Quantity, f3: Quantity, f4: Quantity) -> tuple[float, bool]:
    """``|v1 v2 + v2 v3 + v3 v4 - v1 v4|`` for a sharp quadruple; bounded by 2."""
    fs = (f1, f2, f3, f4)
    for j, f in enumerate(fs, 1):
        r = spectral_norm(mul(f, f) - 1)
        if r > REAL_TOL:
            raise PreconditionError(f"f{j}^2 = 1 violated by {r:.3g}")
    for j, k in ODD_PAIRS:
        c = spectral_norm(commutator(fs[j], fs[k]))
        if c > COMMUTE_TOL:
            raise NoncommutingError(f"f{j + 1} and f{k + 1} must commute (|[f, g]| = {c:.3g})", c)
    vals = [value(v, f) for f in fs]
    for j, k in ODD_PAIRS:
        if not is_defined(value(v, _herm(mul(fs[j], fs[k])))):
            raise PreconditionError(f"f{j + 1} f{k + 1} has no value in this state")
    if not all(is_defined(x) for x in vals):
        raise PreconditionError("every f_j needs a value in this state")
    report = check_sharpness(v, fs, closure_depth=1)
    if not report.verdict:
        rule, names, r = report.witnesses[0]
        raise PreconditionError(f"the quadruple is not sharp: rule {rule} fails on {', '.join(names)} ({r:.3g})")
    v1, v2, v3, v4 = vals
    gamma = abs(v1 * v2 + v2 * v3 + v3 * v4 - v1 * v4)
    return float(gamma), gamma <= 2 + 1e-9


def approx_product_rule(vE: EnsembleState, f: Quantity, g: Quantity) -> tuple[float, float, bool]:
    """``|v(fg) - v(f) v(g)| <= Df Dg`` with ``Df = sqrt(v(f^2) - v(f)^2)``."""
    if not isinstance(vE, EnsembleState):
        raise PreconditionError("the approximate product rule is stated for ensemble states")
    if not (is_hermitian(f) and is_hermitian(g)):
        raise PreconditionError("f and g must be Hermitian")
    c = spectral_norm(commutator(f, g))
    if c > COMMUTE_TOL:
        raise NoncommutingError(f"f and g must commute (|[f, g]| = {c:.3g})", c)
    vf, vg = value(vE, f), value(vE, g)

    def spread(h, vh):
        return math.sqrt(max(value(vE, mul(h, h)) - vh * vh, 0.0))

    lhs = abs(value(vE, mul(f, g)) - vf * vg)
    bound = spread(f, vf) * spread(g, vg)
    return lhs, bound, lhs <= bound + 1e-10


def pure_state(ctx: AlgebraContext, psi) -> EnsembleState:
    """The ensemble state of the pure ensemble ``psi``."""
    return EnsembleState(PureEnsemble(ctx, psi))
