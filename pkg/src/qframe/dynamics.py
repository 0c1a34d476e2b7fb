"""Automorphism groups: Hamiltonian conjugation and fixed scattering.

With ``U(t) = exp(itH/hbar)`` the Heisenberg picture is
``f(t) = U f U*`` and obeys ``i hbar df/dt = [f(t), H]``. The dual
Schrodinger picture moves the state instead: ``psi <- U* psi`` and
``rho <- U* rho U``, so that ``v_t(f) = v(f(t))`` and
``i hbar drho/dt = [H, rho(t)]``.
"""
from __future__ import annotations

from typing import Any

import numpy as np

from .ensembles import DensityEnsemble, Ensemble, PureEnsemble, WeightedEnsemble
from .errors import ContextMismatchError, ParseError, PreconditionError
from .qalgebra import (
    Quantity,
    adjoint,
    commutator,
    hermitian_defect,
    mul,
    quantity_from_json,
    quantity_to_json,
    spectral_norm,
)
from .states import ClassicalPoint, Copenhagen, EnsembleState, Valuation

UNITARY_TOL = 1e-10


class AutomorphismFamily:
    ctx = None

    def unitary(self, t: float) -> np.ndarray:
        """The matrix U with ``S_t(f) = U f U*`` (a vector on the diagonal algebra)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class HamiltonianConjugation(AutomorphismFamily):
    def __init__(self, H: Quantity, hbar: float = 1.0):
        defect = hermitian_defect(H)
        if defect > H.ctx.tol_herm * max(1.0, spectral_norm(H)):
            raise PreconditionError(f"H is not Hermitian (defect {defect:.3g})")
        if not hbar > 0:
            raise PreconditionError("hbar must be positive")
        self.H, self.hbar, self.ctx = H, float(hbar), H.ctx
        if H.ctx.is_diagonal:
            self._w, self._V = H.data.real.copy(), None
        else:
            self._w, self._V = np.linalg.eigh((H.data + H.data.conj().T) / 2)

    def unitary(self, t):
        phases = np.exp(1j * float(t) * self._w / self.hbar)
        if self._V is None:
            return phases
        return (self._V * phases) @ self._V.conj().T

    def to_json(self):
        return {"kind": "hamiltonian", "H": quantity_to_json(self.H), "hbar": self.hbar}


class FixedScattering(AutomorphismFamily):
    """A single automorphism ``f -> s f s*``, exposed as t = 1 (t = 0 is the identity)."""

    def __init__(self, s: Quantity):
        r = unitary_defect(s)
        if r > UNITARY_TOL:
            raise PreconditionError(f"s is not unitary (|s*s - 1| = {r:.3g})")
        self.s, self.ctx = s, s.ctx

    def unitary(self, t):
        if t == 1:
            return self.s.data
        if t == 0:
            return np.ones(self.ctx.dim) if self.ctx.is_diagonal else np.eye(self.ctx.dim)
        raise PreconditionError(f"a fixed scattering map only exists at t = 0 or t = 1, not {t}")

    def to_json(self):
        return {"kind": "scattering", "s": quantity_to_json(self.s)}


def unitary_defect(s: Quantity) -> float:
    return max(spectral_norm(mul(adjoint(s), s) - 1), spectral_norm(mul(s, adjoint(s)) - 1))


def _conjugate(ctx, U: np.ndarray, data: np.ndarray) -> np.ndarray:
    if ctx.is_diagonal:
        return U * data * U.conj()
    return U @ data @ U.conj().T


def evolve_quantity(A: AutomorphismFamily, f: Quantity, t: float) -> Quantity:
    """The Heisenberg quantity ``f(t) = U(t) f U(t)*``."""
    if not A.ctx.same_algebra(f.ctx):
        raise ContextMismatchError("family and quantity live in different algebras")
    return Quantity(f.ctx, _conjugate(f.ctx, A.unitary(t), f.data))


def scattering_map(s: Quantity, f: Quantity) -> Quantity:
    """``S(f) = s f s*`` for unitary s."""
    return evolve_quantity(FixedScattering(s), f, 1)


def _evolve_ensemble(A: AutomorphismFamily, E: Ensemble, t: float) -> Ensemble:
    U = A.unitary(t)
    if isinstance(E, PureEnsemble):
        psi = U.conj().T @ E.psi if U.ndim == 2 else U.conj() * E.psi
        return PureEnsemble(E.ctx, psi)
    if E.ctx.is_diagonal:
        # diagonal unitaries act trivially on weights
        return WeightedEnsemble(E.ctx, np.diag(E.density()).real)
    return DensityEnsemble(E.ctx, U.conj().T @ E.density() @ U)


def evolve_state(A: AutomorphismFamily, v: Valuation, t: float) -> Valuation:
    """The Schrodinger state ``v_t = v o S_t``."""
    if not A.ctx.same_algebra(v.ctx):
        raise ContextMismatchError("family and state live in different algebras")
    if isinstance(v, ClassicalPoint):
        raise PreconditionError("classical point states have no Hamiltonian flow here")
    if isinstance(v, Copenhagen):
        return Copenhagen(v.ctx, A.unitary(t).conj().T @ v.psi)
    if isinstance(v, EnsembleState):
        return EnsembleState(_evolve_ensemble(A, v.E, t))
    raise PreconditionError(f"cannot evolve {type(v).__name__}")


def _central_difference(path, t: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    return (path(t + dt) - path(t - dt)) / (2 * dt)


def _require_hamiltonian(A) -> None:
    if not isinstance(A, HamiltonianConjugation):
        raise PreconditionError("differential checks need a Hamiltonian family")


def check_heisenberg_equation(A: HamiltonianConjugation, f: Quantity, t: float,
                              dt: float = 1e-4) -> float:
    """``|(f(t+dt) - f(t-dt))/2dt - [f(t), H]/(i hbar)|``; O(dt^2)."""
    _require_hamiltonian(A)
    deriv = _central_difference(lambda s: evolve_quantity(A, f, s).data, t, dt)
    exact = commutator(evolve_quantity(A, f, t), A.H).data / (1j * A.hbar)
    return spectral_norm(Quantity(f.ctx, deriv - exact))


def check_von_neumann(A: HamiltonianConjugation, rho, t: float, dt: float = 1e-4) -> float:
    """``|drho/dt - [H, rho(t)]/(i hbar)|`` for ``rho(t) = U(t)* rho U(t)``."""
    _require_hamiltonian(A)
    if isinstance(rho, Ensemble):
        rho = Quantity(rho.ctx, rho.density())

    def path(s):
        U = A.unitary(s)
        return _conjugate(rho.ctx, U.conj().T if U.ndim == 2 else U.conj(), rho.data)

    deriv = _central_difference(path, t, dt)
    exact = commutator(A.H, Quantity(rho.ctx, path(t))).data / (1j * A.hbar)
    return spectral_norm(Quantity(rho.ctx, deriv - exact))


def automorphism_residuals(A: AutomorphismFamily, f: Quantity, g: Quantity, t: float,
                           s: float | None = None) -> dict[str, float]:
    """Residuals of the automorphism laws, relative to the input norms.

    ``scalars``: ``S(a) = a``; ``adjoint``: ``S(f*) = S(f)*``; ``sum`` and
    ``product``: ``S(f+g)``, ``S(fg)``; ``group`` (Hamiltonian families with
    s given): ``S_{s+t} = S_s o S_t``.
    """
    S = lambda q, u=t: evolve_quantity(A, q, u)
    nf, ng = max(1.0, spectral_norm(f)), max(1.0, spectral_norm(g))
    alpha = 0.7 - 1.3j
    out = {
        "scalars": spectral_norm(S(f.ctx.scalar(alpha)) - alpha) / abs(alpha),
        "adjoint": spectral_norm(S(adjoint(f)) - adjoint(S(f))) / nf,
        "sum": spectral_norm(S(f + g) - (S(f) + S(g))) / (nf + ng),
        "product": spectral_norm(S(mul(f, g)) - mul(S(f), S(g))) / (nf * ng),
    }
    if s is not None and isinstance(A, HamiltonianConjugation):
        out["group"] = spectral_norm(S(f, s + t) - S(S(f), s)) / nf
    return out


def family_from_json(obj: Any, tol: float | None = None) -> AutomorphismFamily:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("family must be a JSON object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "hamiltonian":
            if "H" not in obj:
                raise ParseError("hamiltonian family is missing field 'H'")
            hbar = obj.get("hbar", 1.0)
            if not isinstance(hbar, (int, float)) or isinstance(hbar, bool):
                raise ParseError(f"hbar must be a number, got {hbar!r}")
            return HamiltonianConjugation(quantity_from_json(obj["H"], tol), hbar)
        if kind == "scattering":
            if "s" not in obj:
                raise ParseError("scattering family is missing field 's'")
            return FixedScattering(quantity_from_json(obj["s"], tol))
    except PreconditionError as exc:
        raise ParseError(str(exc)) from None
    raise ParseError(f"unknown family kind {kind!r}; expected 'hamiltonian' or 'scattering'")
