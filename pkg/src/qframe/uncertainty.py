"""Cauchy-Schwarz, the uncertainty relation and complementarity.

A Hermitian pair (f, g) is complementary when ``(f-x)^2 + (g-y)^2 >= gamma^2``
for some gamma > 0 and all real x, y. :func:`certify_complementarity`
estimates the best gamma by a coarse grid search followed by coordinate
descent (see :mod:`qframe._kernels`).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .ensembles import Ensemble, covariance, uncertainty
from .errors import ContextMismatchError, PreconditionError
from .qalgebra import AlgebraContext, Quantity, adjoint, is_hermitian, mul, spectral_norm

RELATION_TOL = 1e-10


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def check_cauchy_schwarz(E: Ensemble, f: Quantity, g: Quantity) -> InequalityCheck:
    """``|<f*g>|^2 <= <f*f><g*g>``."""
    lhs = abs(E(mul(adjoint(f), g))) ** 2
    rhs = E(mul(adjoint(f), f)).real * E(mul(adjoint(g), g)).real
    scale = max(1.0, abs(rhs), lhs)
    return InequalityCheck(lhs, rhs, lhs <= rhs + RELATION_TOL * scale)


def check_uncertainty_relation(E: Ensemble, f: Quantity, g: Quantity) -> InequalityCheck:
    """``sigma(f)^2 sigma(g)^2 >= cov(f,g)^2 + |<f*g - g*f>/2|^2``."""
    sf, sg = uncertainty(E, f), uncertainty(E, g)
    lhs = sf * sf * sg * sg
    skew = E(mul(adjoint(f), g) - mul(adjoint(g), f)) / 2
    rhs = covariance(E, f, g) ** 2 + abs(skew) ** 2
    scale = max(1.0, lhs, rhs)
    return InequalityCheck(lhs, rhs, lhs >= rhs - RELATION_TOL * scale)


def check_position_momentum_tradeoff(E: Ensemble, q: Quantity, p: Quantity,
                                     dq: float, dp: float, hbar: float = 1.0) -> InequalityCheck:
    """``(sigma(p)/dp)^2 + (sigma(q)/dq)^2 >= hbar/(dp dq)``."""
    lhs = (uncertainty(E, p) / dp) ** 2 + (uncertainty(E, q) / dq) ** 2
    rhs = hbar / (dp * dq)
    return InequalityCheck(lhs, rhs, lhs >= rhs - 1e-8)


# ---------------------------------------------------------------- complementarity

@dataclass(frozen=True)
class ComplementarityCertificate:
    gamma: float
    argmin_x: float
    argmin_y: float
    grid_range: float
    grid_steps: int
    refined: bool
    backend: str

    def to_json(self) -> dict:
        return asdict(self)


def default_range(f: Quantity, g: Quantity) -> float:
    return 2.0 * (spectral_norm(f) + spectral_norm(g)) + 1.0


def certify_complementarity(f: Quantity, g: Quantity, range: float | None = None,
                            coarse_steps: int = 61, min_step: float = 1e-8,
                            refine: bool = True) -> ComplementarityCertificate:
    """Best gamma found for ``(f-x)^2 + (g-y)^2 >= gamma^2`` on a square box.

    The search is a ``coarse_steps x coarse_steps`` grid on
    ``[-range, range]^2`` followed by coordinate descent from the best grid
    point, halving the step down to ``min_step``. Ties on the grid go to
    the lexicographically smallest ``(x, y)``. The result only certifies the
    searched box; the default range ``2(|f|+|g|)+1`` contains the global
    minimizer because the objective grows without bound away from the
    spectra.

    On the diagonal algebra the pointwise pairs ``(f_k, g_k)`` are probed
    instead of a grid; the objective vanishes there exactly.
    """
    if not f.ctx.same_algebra(g.ctx):
        raise ContextMismatchError("f and g must live in the same algebra")
    if not (is_hermitian(f) and is_hermitian(g)):
        raise PreconditionError("complementarity is defined for Hermitian quantities")
    if coarse_steps < 2:
        raise ValueError("coarse_steps must be >= 2")
    r = default_range(f, g) if range is None else float(range)
    xs = np.linspace(-r, r, coarse_steps)

    if f.ctx.is_diagonal:
        return _certify_diagonal(f, g, r, coarse_steps)

    fm = np.ascontiguousarray((f.data + f.data.conj().T) / 2)
    gm = np.ascontiguousarray((g.data + g.data.conj().T) / 2)
    grid = _kernels.grid_sigma_min(fm, gm, xs, xs)
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)  # first hit = smallest (x, y)
    x, y, best = float(xs[i]), float(xs[j]), float(grid[i, j])
    if refine:
        step = xs[1] - xs[0]
        x, y, best = _kernels.descent(fm, gm, x, y, step, min_step)
    return ComplementarityCertificate(best, x, y, r, coarse_steps, refine, _kernels.BACKEND)


def _certify_diagonal(f, g, r, steps) -> ComplementarityCertificate:
    # at x = f_k, y = g_k the k-th entry of (f-x)^2 + (g-y)^2 is exactly zero
    fv, gv = f.data.real, g.data.real
    k = int(np.lexsort((gv, fv))[0])
    return ComplementarityCertificate(0.0, float(fv[k]), float(gv[k]), r, steps, False, "exact")


def complementarity_objective(f: Quantity, g: Quantity, x: float, y: float) -> float:
    """``lambda_min((f-x)^2 + (g-y)^2)`` by a Hermitian eigensolver."""
    m = mul(f - x, f - x) + mul(g - y, g - y)
    if m.ctx.is_diagonal:
        return float(np.min(m.data.real))
    return float(np.linalg.eigvalsh((m.data + m.data.conj().T) / 2)[0])


# ---------------------------------------------------------------- oscillator

def truncated_oscillator(n: int, hbar: float = 1.0) -> tuple[Quantity, Quantity]:
    """Position and momentum of the n-level truncated harmonic oscillator.

    ``[q, p] = i hbar (1 - n P_top)`` where ``P_top`` projects on the highest
    level; the defect is a property of every finite truncation.
    """
    if n < 2:
        raise ValueError("truncation needs n >= 2")
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    ctx = AlgebraContext.matrix(n)
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)
    c = math.sqrt(hbar / 2)
    q = c * (a + a.conj().T)
    p = 1j * c * (a.conj().T - a)
    return Quantity(ctx, q), Quantity(ctx, p)


def ccr_defect(n: int, hbar: float = 1.0) -> Quantity:
    """The exact commutator ``i hbar (1 - n P_top)`` of the truncated pair."""
    ctx = AlgebraContext.matrix(n)
    d = np.ones(n, dtype=complex)
    d[-1] = 1 - n
    return Quantity(ctx, 1j * hbar * np.diag(d))
