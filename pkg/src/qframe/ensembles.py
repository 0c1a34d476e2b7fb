"""Ensembles: linear, normalized, positive expectation functionals.

Four forms are provided. :class:`WeightedEnsemble` is the weighted mean of
finite probability theory and is the only form on the diagonal algebra (on
the matrix algebra it acts through the diagonal). :class:`PureEnsemble`,
:class:`DensityEnsemble` and :class:`GibbsEnsemble` are the quantum forms.
"""
from __future__ import annotations

from typing import Any

import numpy as np
from scipy.special import logsumexp

from .errors import BrokenEnsembleError, ContextMismatchError, ParseError, PreconditionError
from .qalgebra import (
    AlgebraContext,
    Quantity,
    adjoint,
    complex_list_from_json,
    complex_list_to_json,
    context_from_json,
    is_hermitian,
    kron,
    mul,
    spectral_norm,
)

DENSITY_REPAIR_LIMIT = 1e-6
MAX_TENSOR_DIM = 4096


class Ensemble:
    """Base class; subclasses implement :meth:`_expect`."""

    form: str = ""

    def __init__(self, ctx: AlgebraContext):
        self.ctx = ctx

    def expectation(self, f) -> complex:
        if not isinstance(f, Quantity):
            return complex(f)
        if not self.ctx.same_algebra(f.ctx):
            raise ContextMismatchError(
                f"ensemble on {self.ctx.kind}({self.ctx.dim}) applied to a {f.ctx.kind}({f.ctx.dim}) quantity"
            )
        return complex(self._expect(f))

    __call__ = expectation

    def _expect(self, f: Quantity) -> complex:
        raise NotImplementedError

    def density(self) -> np.ndarray:
        """The density matrix representing this ensemble (matrix algebra)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.ctx.kind}({self.ctx.dim}))"


class WeightedEnsemble(Ensemble):
    form = "weighted"

    def __init__(self, ctx: AlgebraContext, weights):
        super().__init__(ctx)
        p = np.asarray(weights, dtype=float)
        if p.shape != (ctx.dim,):
            raise ValueError(f"expected {ctx.dim} weights, got shape {p.shape}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("weights must be finite and nonnegative")
        total = p.sum()
        if total <= 0:
            raise ValueError("weights must not all vanish")
        self.weights = p / total
        self.weights.setflags(write=False)

    def _expect(self, f):
        vals = f.data if f.ctx.is_diagonal else np.diagonal(f.data)
        return np.dot(self.weights, vals)

    def density(self):
        return np.diag(self.weights).astype(complex)

    def to_json(self):
        return {"form": self.form, "ctx": self.ctx.to_json(), "data": self.weights.tolist()}


class _MatrixEnsemble(Ensemble):
    def __init__(self, ctx: AlgebraContext):
        if ctx.is_diagonal:
            raise PreconditionError(f"the {self.form} form needs a matrix algebra; use weights on C^n")
        super().__init__(ctx)


class PureEnsemble(_MatrixEnsemble):
    """``<f> = psi* f psi`` for a unit vector psi (normalized on construction)."""

    form = "pure"

    def __init__(self, ctx: AlgebraContext, psi):
        super().__init__(ctx)
        v = np.array(psi, dtype=complex)
        if v.shape != (ctx.dim,):
            raise ValueError(f"psi must have {ctx.dim} entries, got shape {v.shape}")
        norm = np.linalg.norm(v)
        if not norm > 0:
            raise ValueError("psi must be nonzero")
        self.psi = v / norm
        self.psi.setflags(write=False)

    def _expect(self, f):
        return np.vdot(self.psi, f.data @ self.psi)

    def density(self):
        return np.outer(self.psi, self.psi.conj())

    def to_json(self):
        return {"form": self.form, "ctx": self.ctx.to_json(), "data": complex_list_to_json(self.psi)}


class DensityEnsemble(_MatrixEnsemble):
    """``<f> = tr(rho f)``.

    rho is re-symmetrized and trace-normalized on construction; the repair
    sizes are kept in ``herm_residual`` and ``trace_residual``.
    """

    form = "density"

    def __init__(self, ctx: AlgebraContext, rho):
        super().__init__(ctx)
        r = np.array(rho, dtype=complex)
        if r.shape != (ctx.dim, ctx.dim):
            raise ValueError(f"rho must be {ctx.dim}x{ctx.dim}, got shape {r.shape}")
        self.herm_residual = float(np.linalg.norm(r - r.conj().T, 2))
        r = (r + r.conj().T) / 2
        tr = np.trace(r).real
        self.trace_residual = float(abs(tr - 1.0))
        if self.herm_residual > DENSITY_REPAIR_LIMIT or self.trace_residual > DENSITY_REPAIR_LIMIT:
            raise ValueError(
                f"rho is not a density matrix: hermiticity residual {self.herm_residual:.3g}, "
                f"trace residual {self.trace_residual:.3g}"
            )
        r = r / tr
        lo = np.linalg.eigvalsh(r)[0]
        if lo < -ctx.tol_psd:
            raise ValueError(f"rho has negative eigenvalue {lo:.3g}")
        self.rho = r
        self.rho.setflags(write=False)

    def _expect(self, f):
        # tr(rho f) without forming the product
        return np.sum(self.rho.T * f.data)

    def density(self):
        return self.rho

    def to_json(self):
        return {"form": self.form, "ctx": self.ctx.to_json(), "data": complex_list_to_json(self.rho)}


class GibbsEnsemble(_MatrixEnsemble):
    """Equilibrium ensemble ``<f> = tr(exp(-S/kbar) f)``.

    The entropy S is shifted by ``kbar log Z`` so that ``tr exp(-S/kbar) = 1``.
    """

    form = "gibbs"

    def __init__(self, ctx: AlgebraContext, entropy, kbar: float = 1.0):
        super().__init__(ctx)
        if not kbar > 0:
            raise ValueError("kbar must be positive")
        s = entropy.data if isinstance(entropy, Quantity) else np.array(entropy, dtype=complex)
        if s.shape != (ctx.dim, ctx.dim):
            raise ValueError(f"entropy must be {ctx.dim}x{ctx.dim}")
        if not is_hermitian(Quantity(ctx, s)):
            raise PreconditionError("entropy must be Hermitian")
        s = (s + s.conj().T) / 2
        w, v = np.linalg.eigh(s)
        self.log_partition = float(logsumexp(-w / kbar))
        shift = kbar * self.log_partition
        self.kbar = float(kbar)
        self.entropy = Quantity(ctx, s + shift * np.eye(ctx.dim))
        weights = np.exp(-(w + shift) / kbar)
        self.rho = (v * weights) @ v.conj().T
        self.rho.setflags(write=False)

    def _expect(self, f):
        return np.sum(self.rho.T * f.data)

    def density(self):
        return self.rho

    def to_json(self):
        return {"form": self.form, "ctx": self.ctx.to_json(), "kbar": self.kbar,
                "data": complex_list_to_json(self.entropy.data)}


# ---------------------------------------------------------------- statistics

def _as_quantity(E: Ensemble, f) -> Quantity:
    return f if isinstance(f, Quantity) else E.ctx.scalar(f)


def _is_constant(f: Quantity) -> bool:
    d = f.data
    if f.ctx.is_diagonal:
        return bool(np.all(d == d[0]))
    return bool(np.all(d == d[0, 0] * np.eye(f.ctx.dim)))


def expectation(E: Ensemble, f) -> complex:
    return E.expectation(f)


def covariance(E: Ensemble, f, g) -> float:
    """``Re <(f - <f>)* (g - <g>)>``."""
    f, g = _as_quantity(E, f), _as_quantity(E, g)
    if _is_constant(f) or _is_constant(g):
        # exact: a constant is uncorrelated with everything
        return 0.0
    df = f - E(f)
    dg = g - E(g)
    return float(E(mul(adjoint(df), dg)).real)


def uncertainty(E: Ensemble, f) -> float:
    """Standard deviation; tiny negative variances from rounding clamp to 0."""
    f = _as_quantity(E, f)
    var = covariance(E, f, f)
    if var < 0:
        if var < -1e-12 * max(1.0, spectral_norm(f) ** 2):
            raise BrokenEnsembleError(f"negative variance {var:.3g}")
        return 0.0
    return float(np.sqrt(var))


def is_vanishing(E: Ensemble, f: Quantity) -> bool:
    return abs(E(mul(adjoint(f), f))) <= 1e-12 * max(1.0, spectral_norm(f) ** 2)


# ---------------------------------------------------------------- tensor products

def product_ensemble(E1: Ensemble, E2: Ensemble) -> Ensemble:
    """The ensemble of two independent subsystems."""
    if E1.ctx.kind != E2.ctx.kind:
        raise ContextMismatchError("tensor factors must share a realization")
    ctx = AlgebraContext(E1.ctx.kind, E1.ctx.dim * E2.ctx.dim, E1.ctx.tol_herm, E1.ctx.tol_psd)
    if isinstance(E1, WeightedEnsemble) and isinstance(E2, WeightedEnsemble):
        return WeightedEnsemble(ctx, np.kron(E1.weights, E2.weights))
    if isinstance(E1, PureEnsemble) and isinstance(E2, PureEnsemble):
        return PureEnsemble(ctx, np.kron(E1.psi, E2.psi))
    return DensityEnsemble(ctx, np.kron(E1.density(), E2.density()))


def _check_tensor_size(dim: int, N: int) -> None:
    if not 1 <= N <= 6:
        raise PreconditionError(f"number of copies must be in 1..6, got {N}")
    if dim ** N > MAX_TENSOR_DIM:
        raise PreconditionError(f"{N} copies of a {dim}-dimensional algebra exceed dimension {MAX_TENSOR_DIM}")


def tensor_power(E: Ensemble, N: int) -> Ensemble:
    _check_tensor_size(E.ctx.dim, N)
    out = E
    for _ in range(N - 1):
        out = product_ensemble(out, E)
    return out


def slot_quantity(f: Quantity, slot: int, N: int) -> Quantity:
    """``1 (x) ... (x) f (x) ... (x) 1`` with f in position ``slot`` (0-based)."""
    if not 0 <= slot < N:
        raise ValueError(f"slot {slot} out of range for {N} copies")
    one = f.ctx.identity()
    out = f if slot == 0 else one
    for l in range(1, N):
        out = kron(out, f if l == slot else one)
    return out


def mean_quantity(f: Quantity, N: int) -> Quantity:
    """``(1/N) sum_l f_l`` over the N tensor slots."""
    total = slot_quantity(f, 0, N)
    for l in range(1, N):
        total = total + slot_quantity(f, l, N)
    return total / N


def tensor_power_mean(E: Ensemble, f: Quantity, N: int) -> tuple[float, float]:
    """Expectation and uncertainty of the mean of N independent copies of f."""
    if not is_hermitian(f):
        raise PreconditionError("tensor_power_mean needs a Hermitian quantity")
    _check_tensor_size(E.ctx.dim, N)
    EN = tensor_power(E, N)
    fbar = mean_quantity(f, N)
    return float(EN(fbar).real), uncertainty(EN, fbar)


# ---------------------------------------------------------------- sampling

def random_density(ctx: AlgebraContext, rng: np.random.Generator, rank: int | None = None) -> DensityEnsemble:
    n = ctx.dim
    k = n if rank is None else rank
    z = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    rho = z @ z.conj().T
    return DensityEnsemble(ctx, rho / np.trace(rho).real)


def random_pure(ctx: AlgebraContext, rng: np.random.Generator) -> PureEnsemble:
    return PureEnsemble(ctx, rng.normal(size=ctx.dim) + 1j * rng.normal(size=ctx.dim))


def random_weighted(ctx: AlgebraContext, rng: np.random.Generator) -> WeightedEnsemble:
    return WeightedEnsemble(ctx, rng.random(ctx.dim) + 1e-3)


# ---------------------------------------------------------------- JSON

def ensemble_to_json(E: Ensemble) -> dict:
    return E.to_json()


def ensemble_from_json(obj: Any, tol: float | None = None) -> Ensemble:
    if not isinstance(obj, dict):
        raise ParseError("ensemble must be a JSON object")
    for key in ("form", "ctx", "data"):
        if key not in obj:
            raise ParseError(f"ensemble is missing field {key!r}")
    ctx = context_from_json(obj["ctx"], tol)
    form, data, n = obj["form"], obj["data"], ctx.dim
    try:
        if form == "weighted":
            if not isinstance(data, list) or len(data) != n:
                raise ParseError(f"weighted ensemble needs {n} weights")
            for i, w in enumerate(data):
                if not isinstance(w, (int, float)) or isinstance(w, bool):
                    raise ParseError(f"data[{i}]: weight must be a number, got {w!r}")
            return WeightedEnsemble(ctx, data)
        if form == "pure":
            return PureEnsemble(ctx, complex_list_from_json(data, n))
        if form == "density":
            return DensityEnsemble(ctx, complex_list_from_json(data, n * n).reshape(n, n))
        if form == "gibbs":
            kbar = obj.get("kbar", 1.0)
            return GibbsEnsemble(ctx, complex_list_from_json(data, n * n).reshape(n, n), kbar)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"invalid {form} ensemble: {exc}") from None
    raise ParseError(f"unknown ensemble form {form!r}")
