"""Quantities in the two finite-dimensional Q-algebra realizations.

``diagonal``: C^n with pointwise operations and componentwise order (the
classical realization over n elementary events).

``matrix``: C^{n x n} with the Loewner order (n-level quantum systems).

Complex numbers embed as multiples of the unit; every binary operation
accepts a plain Python/numpy scalar in place of a quantity.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ContextMismatchError, ParseError

DIAGONAL = "diagonal"
MATRIX = "matrix"
_KINDS = (DIAGONAL, MATRIX)


@dataclass(frozen=True)
class AlgebraContext:
    """Realization (``"diagonal"`` or ``"matrix"``), dimension and tolerances."""

    kind: str
    dim: int
    tol_herm: float = 1e-10
    tol_psd: float = 1e-10

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown algebra kind {self.kind!r}; expected one of {_KINDS}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        if not (self.tol_herm > 0 and self.tol_psd > 0):
            raise ValueError("tolerances must be positive")

    @classmethod
    def matrix(cls, n: int, **tols) -> AlgebraContext:
        return cls(MATRIX, n, **tols)

    @classmethod
    def diagonal(cls, n: int, **tols) -> AlgebraContext:
        return cls(DIAGONAL, n, **tols)

    @property
    def is_diagonal(self) -> bool:
        return self.kind == DIAGONAL

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.dim,) if self.is_diagonal else (self.dim, self.dim)

    def same_algebra(self, other: AlgebraContext) -> bool:
        return self.kind == other.kind and self.dim == other.dim

    def scalar(self, alpha: complex) -> Quantity:
        alpha = complex(alpha)
        if self.is_diagonal:
            return Quantity(self, np.full(self.dim, alpha, dtype=complex))
        return Quantity(self, alpha * np.eye(self.dim, dtype=complex))

    def identity(self) -> Quantity:
        return self.scalar(1.0)

    def zero(self) -> Quantity:
        return self.scalar(0.0)

    def quantity(self, data) -> Quantity:
        return Quantity(self, data)

    def to_json(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}


class Quantity:
    """An element of a finite-dimensional Q-algebra.

    The payload is stored read-only, so quantities can be shared freely.
    Arithmetic operators mirror the module-level functions; scalars on
    either side are embedded as multiples of the unit.
    """

    __slots__ = ("ctx", "data")
    __array_priority__ = 1000  # keep numpy scalars from broadcasting over us

    def __init__(self, ctx: AlgebraContext, data):
        arr = np.array(data, dtype=complex)
        if arr.shape != ctx.shape:
            raise ValueError(f"data of shape {arr.shape} does not match {ctx.kind}({ctx.dim})")
        if not np.all(np.isfinite(arr)):
            raise ValueError("quantity data contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Quantity is immutable")

    def __repr__(self):
        return f"Quantity({self.ctx.kind}({self.ctx.dim}), {np.array2string(self.data, precision=4)})"

    # dense matrix view; the diagonal realization becomes diag(data)
    def matrix(self) -> np.ndarray:
        return np.diag(self.data) if self.ctx.is_diagonal else self.data

    @property
    def H(self) -> Quantity:
        return adjoint(self)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, -1.0 * _coerce(self.ctx, other))

    def __rsub__(self, other):
        return add(_coerce(self.ctx, other), -1.0 * self)

    def __neg__(self):
        return Quantity(self.ctx, -self.data)

    def __mul__(self, other):
        if _is_scalar(other):
            return Quantity(self.ctx, complex(other) * self.data)
        return mul(self, other)

    def __rmul__(self, other):
        if _is_scalar(other):
            return Quantity(self.ctx, complex(other) * self.data)
        return mul(other, self)

    def __truediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return Quantity(self.ctx, self.data / complex(other))

    def __pow__(self, l: int):
        return power(self, l)


def _is_scalar(x) -> bool:
    return isinstance(x, numbers.Number) or (isinstance(x, np.generic) and np.isscalar(x))


def _coerce(ctx: AlgebraContext, x) -> Quantity:
    if isinstance(x, Quantity):
        return x
    if _is_scalar(x):
        return ctx.scalar(x)
    raise TypeError(f"cannot use {type(x).__name__} as a quantity")


def _pair(f, g) -> tuple[Quantity, Quantity]:
    if isinstance(f, Quantity):
        g = _coerce(f.ctx, g)
    elif isinstance(g, Quantity):
        f = _coerce(g.ctx, f)
    else:
        raise TypeError("at least one operand must be a Quantity")
    if not f.ctx.same_algebra(g.ctx):
        raise ContextMismatchError(
            f"operands live in different algebras: {f.ctx.kind}({f.ctx.dim}) vs {g.ctx.kind}({g.ctx.dim})"
        )
    return f, g


def add(f, g) -> Quantity:
    f, g = _pair(f, g)
    return Quantity(f.ctx, f.data + g.data)


def mul(f, g) -> Quantity:
    f, g = _pair(f, g)
    if f.ctx.is_diagonal:
        return Quantity(f.ctx, f.data * g.data)
    return Quantity(f.ctx, f.data @ g.data)


def adjoint(f: Quantity) -> Quantity:
    if f.ctx.is_diagonal:
        return Quantity(f.ctx, f.data.conj())
    return Quantity(f.ctx, f.data.conj().T)


def commutator(f, g) -> Quantity:
    f, g = _pair(f, g)
    if f.ctx.is_diagonal:
        return f.ctx.zero()
    return Quantity(f.ctx, f.data @ g.data - g.data @ f.data)


def re_part(f: Quantity) -> Quantity:
    return Quantity(f.ctx, (f.data + adjoint(f).data) / 2)


def im_part(f: Quantity) -> Quantity:
    return Quantity(f.ctx, (f.data - adjoint(f).data) / 2j)


def spectral_norm(f: Quantity) -> float:
    if f.ctx.is_diagonal:
        return float(np.max(np.abs(f.data)))
    return float(np.linalg.norm(f.data, 2))


def power(f: Quantity, l: int) -> Quantity:
    if int(l) != l or l < 0:
        raise ValueError(f"power needs a nonnegative integer exponent, got {l!r}")
    out = f.ctx.identity()
    for _ in range(int(l)):
        out = mul(out, f)
    return out


def hermitian_defect(f: Quantity) -> float:
    """``||f - f*||``."""
    return spectral_norm(Quantity(f.ctx, f.data - adjoint(f).data))


def is_hermitian(f: Quantity, tol: float | None = None) -> bool:
    tol = f.ctx.tol_herm if tol is None else tol
    return hermitian_defect(f) <= tol * max(1.0, spectral_norm(f))


def is_normal(f: Quantity, tol: float = 1e-10) -> bool:
    return spectral_norm(commutator(f, adjoint(f))) <= tol * max(1.0, spectral_norm(f) ** 2)


def min_eigenvalue(f: Quantity) -> float:
    """Smallest eigenvalue of the Hermitian part of ``f``."""
    h = re_part(f)
    if f.ctx.is_diagonal:
        return float(np.min(h.data.real))
    return float(np.linalg.eigvalsh(h.data)[0])


def is_positive(f: Quantity) -> bool:
    scale = max(1.0, spectral_norm(f))
    if hermitian_defect(f) > f.ctx.tol_herm * scale:
        return False
    return min_eigenvalue(f) >= -f.ctx.tol_psd * scale


def leq(f, g) -> bool:
    """``f <= g`` in the partial order; incomparable pairs give False both ways."""
    f, g = _pair(f, g)
    return is_positive(g - f)


def kron(f: Quantity, g: Quantity) -> Quantity:
    """Tensor product ``f (x) g`` in the realization of the operands."""
    if f.ctx.kind != g.ctx.kind:
        raise ContextMismatchError("tensor factors must share a realization")
    ctx = AlgebraContext(f.ctx.kind, f.ctx.dim * g.ctx.dim, f.ctx.tol_herm, f.ctx.tol_psd)
    return Quantity(ctx, np.kron(f.data, g.data))


def distance(f, g) -> float:
    f, g = _pair(f, g)
    return spectral_norm(f - g)


# Standard 2x2 quantities.
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli(k: int, ctx: AlgebraContext | None = None) -> Quantity:
    ctx = ctx or AlgebraContext.matrix(2)
    return Quantity(ctx, {1: PAULI_X, 2: PAULI_Y, 3: PAULI_Z}[k])


# ---------------------------------------------------------------- sampling

def random_quantity(ctx: AlgebraContext, rng: np.random.Generator, form: str = "general") -> Quantity:
    """Draw a random quantity.

    ``form`` is one of ``general``, ``hermitian``, ``psd`` or ``unitary``.
    """
    n = ctx.dim
    if ctx.is_diagonal:
        if form == "general":
            data = rng.normal(size=n) + 1j * rng.normal(size=n)
        elif form == "hermitian":
            data = rng.normal(size=n)
        elif form == "psd":
            data = rng.normal(size=n) ** 2
        elif form == "unitary":
            data = np.exp(2j * np.pi * rng.random(n))
        else:
            raise ValueError(f"unknown form {form!r}")
        return Quantity(ctx, data)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    if form == "general":
        data = z
    elif form == "hermitian":
        data = (z + z.conj().T) / 2
    elif form == "psd":
        data = z.conj().T @ z / n
    elif form == "unitary":
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        data = q * (d / np.abs(d))
    else:
        raise ValueError(f"unknown form {form!r}")
    return Quantity(ctx, data)


# ---------------------------------------------------------------- axiom check

@dataclass
class AxiomReport:
    """Worst relative residual per axiom or identity over all samples."""

    ctx: AlgebraContext
    samples: int
    seed: int
    threshold: float = 1e-10
    residuals: dict[str, float] = field(default_factory=dict)

    def record(self, name: str, value: float) -> None:
        self.residuals[name] = max(self.residuals.get(name, 0.0), float(value))

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v <= self.threshold]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "ctx": self.ctx.to_json(),
            "samples": self.samples,
            "seed": self.seed,
            "threshold": self.threshold,
            "passed": self.passed,
            "failures": self.failures,
            "residuals": self.residuals,
        }


def _rel(diff: Quantity, scale: float = 1.0) -> float:
    return spectral_norm(diff) / max(1.0, scale)


def _neg_part(f: Quantity, scale: float = 1.0) -> float:
    """How far ``f`` is from being >= 0, relative to ``scale``."""
    herm = hermitian_defect(f)
    return max(herm, -min_eigenvalue(f), 0.0) / max(1.0, scale)


def _flag(ok: bool) -> float:
    return 0.0 if ok else 1.0


def check_qalgebra_axioms(ctx: AlgebraContext, samples: int = 100, seed: int = 0,
                          threshold: float = 1e-10) -> AxiomReport:
    """Evaluate the algebra, order and norm laws on seeded random triples."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    rep = AxiomReport(ctx, samples, seed, threshold)
    one, zero = ctx.identity(), ctx.zero()
    nrm = spectral_norm

    # a non-Hermitian quantity is never >= 0
    if ctx.is_diagonal:
        probe = Quantity(ctx, np.full(ctx.dim, 1.0 + 0.5j))
    else:
        probe = Quantity(ctx, np.eye(ctx.dim) + np.eye(ctx.dim, k=1)) if ctx.dim > 1 \
            else Quantity(ctx, [[1.0 + 0.5j]])
    rep.record("order_rejects_nonhermitian", _flag(not is_positive(probe)))
    rep.record("one_positive", _flag(is_positive(one)))
    rep.record("zero_norm", nrm(zero))

    for _ in range(samples):
        f, g, h = (random_quantity(ctx, rng) for _ in range(3))
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        nf, ng, nh = nrm(f), nrm(g), nrm(h)

        sa, sb = ctx.scalar(a), ctx.scalar(b)
        rep.record("scalar_embedding", max(
            _rel(ctx.scalar(a + b) - (sa + sb), abs(a) + abs(b)),
            _rel(ctx.scalar(a * b) - mul(sa, sb), abs(a * b)),
            _rel(ctx.scalar(a.conjugate()) - adjoint(sa), abs(a)),
        ))
        rep.record("mul_associative", _rel(mul(mul(f, g), h) - mul(f, mul(g, h)), nf * ng * nh))
        rep.record("scalar_commutes", _rel(mul(sa, f) - mul(f, sa), abs(a) * nf))
        rep.record("zero_and_one", max(nrm(mul(zero, f)), _rel(mul(one, f) - f, nf)))
        rep.record("add_associative", _rel((f + g) + h - (f + (g + h)), nf + ng + nh))
        rep.record("left_distributive", _rel(mul(f, g + h) - (mul(f, g) + mul(f, h)), nf * (ng + nh)))
        rep.record("add_zero", _rel(add(f, zero) - f, nf))
        rep.record("involution", _flag(np.array_equal(adjoint(adjoint(f)).data, f.data)))
        rep.record("adjoint_product", _rel(adjoint(mul(f, g)) - mul(adjoint(g), adjoint(f)), nf * ng))
        rep.record("adjoint_sum", _rel(adjoint(f + g) - (adjoint(f) + adjoint(g)), nf + ng))
        # nondegeneracy via ||f*f|| = ||f||^2: f*f = 0 forces f = 0
        rep.record("nondegenerate", abs(np.sqrt(nrm(mul(adjoint(f), f))) - nf) / max(1.0, nf))

        # order axioms on constructed comparable pairs
        fh = random_quantity(ctx, rng, "hermitian")
        hh = random_quantity(ctx, rng, "hermitian")
        p1 = random_quantity(ctx, rng, "psd") + 0.1
        p2 = random_quantity(ctx, rng, "psd") + 0.1
        gh = fh + p1  # fh <= gh strictly
        kh = gh + p2
        rep.record("partial_order", max(
            _flag(leq(fh, fh)),
            _flag(leq(fh, gh) and not leq(gh, fh)),
            _flag(leq(fh, kh)),
        ))
        rep.record("order_translation", max(
            _flag(leq(fh + hh, gh + hh)),
            _neg_part((gh + hh) - (fh + hh), nrm(gh) + nrm(hh)),
        ))
        pos = random_quantity(ctx, rng, "psd")
        npos = nrm(pos)
        rep.record("positive_is_hermitian", hermitian_defect(pos) / max(1.0, npos))
        rep.record("order_congruence", _neg_part(mul(mul(adjoint(g), pos), g), npos * ng * ng))

        # derived identities
        rep.record("right_distributive", _rel(mul(f + g, h) - (mul(f, h) + mul(g, h)), (nf + ng) * nh))
        rep.record("add_commutative", max(_rel((f + g) - (g + f), nf + ng), nrm(f - f)))
        lhs = commutator(f, adjoint(f))
        rhs = -2j * commutator(re_part(f), im_part(f))
        rep.record("normality_identity", _rel(lhs - rhs, nf * nf))
        rep.record("squares_positive", max(
            _neg_part(mul(adjoint(f), f), nf * nf),
            _neg_part(mul(f, adjoint(f)), nf * nf),
        ))
        left = mul(mul(adjoint(h), fh), h)
        right = mul(mul(adjoint(h), gh), h)
        lam = abs(a)
        rep.record("conjugation_monotone", max(
            _neg_part(right - left, nh * nh * (nrm(fh) + nrm(gh))),
            _neg_part(lam * gh - lam * fh, lam * (nrm(fh) + nrm(gh))),
        ))
        rep.record("mixed_product_bound", _neg_part(
            ctx.scalar(2 * nf * ng) - (mul(adjoint(f), g) + mul(adjoint(g), f)), nf * ng))
        rep.record("norm_scaling", abs(nrm(a * f) - abs(a) * nf) / max(1.0, abs(a) * nf))
        rep.record("triangle", max(nrm(f + g) - nf - ng, nrm(f - g) - nf - ng, 0.0) / max(1.0, nf + ng))
        rep.record("submultiplicative", max(nrm(mul(f, g)) - nf * ng, 0.0) / max(1.0, nf * ng))
        # realization facts (not derivable from the axioms alone)
        rep.record("fact_adjoint_norm", abs(nrm(adjoint(f)) - nf) / max(1.0, nf))
        rep.record("fact_cstar_identity", abs(nrm(mul(adjoint(f), f)) - nf * nf) / max(1.0, nf * nf))
        if ctx.is_diagonal:
            rep.record("diagonal_mul_commutative", _rel(mul(f, g) - mul(g, f), nf * ng))
    return rep


# ---------------------------------------------------------------- JSON

def context_from_json(obj: Any, tol: float | None = None) -> AlgebraContext:
    if not isinstance(obj, dict):
        raise ParseError("context must be a JSON object with 'kind' and 'dim'")
    try:
        kind, dim = obj["kind"], obj["dim"]
    except KeyError as exc:
        raise ParseError(f"context is missing field {exc.args[0]!r}") from None
    if kind not in _KINDS:
        raise ParseError(f"context kind {kind!r} is not one of {_KINDS}")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"context dim must be a positive integer, got {dim!r}")
    tols = {} if tol is None else {"tol_herm": tol, "tol_psd": tol}
    return AlgebraContext(kind, dim, **tols)


def complex_list_from_json(items: Any, expected: int, what: str = "data") -> np.ndarray:
    """Parse a list of ``[re, im]`` pairs, naming the first bad index."""
    if not isinstance(items, list):
        raise ParseError(f"{what} must be a list of [re, im] pairs")
    out = np.empty(expected, dtype=complex)
    for i, pair in enumerate(items):
        if i >= expected:
            raise ParseError(f"{what}[{i}]: unexpected entry, only {expected} entries expected")
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
            raise ParseError(f"{what}[{i}]: expected a [re, im] pair of numbers, got {pair!r}")
        out[i] = complex(pair[0], pair[1])
    if len(items) < expected:
        raise ParseError(f"{what}[{len(items)}]: missing entry, {expected} entries expected, got {len(items)}")
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise ParseError(f"{what}[{bad}]: entry is not finite")
    return out


def complex_list_to_json(arr: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr, dtype=complex).ravel()]


def quantity_to_json(f: Quantity, **extra) -> dict:
    out = {"kind": f.ctx.kind, "dim": f.ctx.dim, "data": complex_list_to_json(f.data)}
    out.update(extra)
    return out


def quantity_from_json(obj: Any, tol: float | None = None) -> Quantity:
    ctx = context_from_json(obj, tol)
    if "data" not in obj:
        raise ParseError("quantity is missing field 'data'")
    n = ctx.dim
    flat = complex_list_from_json(obj["data"], n if ctx.is_diagonal else n * n)
    return Quantity(ctx, flat if ctx.is_diagonal else flat.reshape(n, n))
