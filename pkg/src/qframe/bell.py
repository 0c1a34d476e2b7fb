"""CHSH combinations: the 2*sqrt(2) bound for every ensemble and the bound 2
when odd-index pairs commute and are uncorrelated."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import Ensemble, PureEnsemble, covariance
from .errors import PreconditionError
from .qalgebra import AlgebraContext, Quantity, commutator, is_hermitian, is_positive, mul, spectral_norm

TSIRELSON = 2 * math.sqrt(2)
BOUND_TOL = 1e-9
PAIR_TOL = 1e-10
# (j, k) index pairs of the four correlators, in the order of the combination
PAIRS = ((0, 1), (2, 1), (2, 3), (0, 3))
SIGNS = (1, 1, 1, -1)


@dataclass
class ChshReport:
    correlators: tuple[float, float, float, float]
    imag_parts: tuple[float, float, float, float]
    singles: tuple[float, float, float, float]
    gamma: float
    tsirelson_ok: bool
    classical_bound_applicable: bool
    classical_ok: bool

    def recompute_gamma(self) -> float:
        total = sum(s * complex(c, i) for s, c, i in zip(SIGNS, self.correlators, self.imag_parts))
        return abs(total)

    def to_json(self) -> dict:
        return {
            "correlators": list(self.correlators),
            "imag_parts": list(self.imag_parts),
            "singles": list(self.singles),
            "gamma": self.gamma,
            "tsirelson_bound": TSIRELSON,
            "tsirelson_ok": self.tsirelson_ok,
            "classical_bound_applicable": self.classical_bound_applicable,
            "classical_ok": self.classical_ok,
        }


def _check_quadruple(fs) -> None:
    if len(fs) != 4:
        raise ValueError("CHSH needs exactly four quantities")
    for k, f in enumerate(fs, 1):
        if not is_hermitian(f):
            raise PreconditionError(f"f{k} is not Hermitian")
        if not is_positive(1 - mul(f, f)):
            raise PreconditionError(f"f{k}^2 <= 1 is violated (norm {spectral_norm(f):.6g})")


def chsh(E: Ensemble, f1: Quantity, f2: Quantity, f3: Quantity, f4: Quantity) -> ChshReport:
    """Evaluate ``|<f1f2> + <f3f2> + <f3f4> - <f1f4>|``.

    The products need not be Hermitian when odd-index pairs fail to commute;
    gamma is then the modulus of the complex combination and the imaginary
    parts are reported alongside the real correlators.
    """
    fs = (f1, f2, f3, f4)
    _check_quadruple(fs)
    values = [E(mul(fs[j], fs[k])) for j, k in PAIRS]
    commuting = all(spectral_norm(commutator(fs[j], fs[k])) <= PAIR_TOL for j, k in PAIRS)
    if commuting:
        worst = max(abs(v.imag) for v in values)
        if worst > PAIR_TOL:
            raise PreconditionError(f"correlator of commuting Hermitian pair has imaginary part {worst:.3g}")
    gamma = abs(sum(s * v for s, v in zip(SIGNS, values)))
    uncorrelated = all(abs(covariance(E, fs[j], fs[k])) <= PAIR_TOL for j, k in PAIRS)
    return ChshReport(
        correlators=tuple(float(v.real) for v in values),
        imag_parts=tuple(float(v.imag) for v in values),
        singles=tuple(float(E(f).real) for f in fs),
        gamma=float(gamma),
        tsirelson_ok=gamma <= TSIRELSON + BOUND_TOL,
        classical_bound_applicable=commuting and uncorrelated,
        classical_ok=gamma <= 2 + BOUND_TOL,
    )


def build_spinpair() -> tuple[tuple[Quantity, Quantity, Quantity, Quantity], PureEnsemble]:
    """The four monomial 4x4 matrices and the entangled vector saturating 2*sqrt(2).

    With the flattening ``(x1, x2, x3, x4) ~ [[x1, x2], [x3, x4]]`` and
    ``u (x) v : x -> u x v^T`` these are ``s1(x)1, 1(x)s1, s3(x)1, 1(x)s3``.
    """
    ctx = AlgebraContext.matrix(4)
    perm = lambda order: np.eye(4)[list(order)]  # row i picks x_order[i]
    f1 = perm((2, 3, 0, 1))
    f2 = perm((1, 0, 3, 2))
    f3 = np.diag([1.0, 1.0, -1.0, -1.0])
    f4 = np.diag([1.0, -1.0, 1.0, -1.0])

    s1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    s3 = np.diag([1.0, -1.0])
    one = np.eye(2)
    for f, expected in ((f1, np.kron(s1, one)), (f2, np.kron(one, s1)),
                        (f3, np.kron(s3, one)), (f4, np.kron(one, s3))):
        assert np.array_equal(f, expected)

    a1 = math.sqrt((2 + math.sqrt(2)) / 8)
    a2 = math.sqrt((2 - math.sqrt(2)) / 8)
    # sign pattern (+, +, -, +): the only arrangement of (a1, a2, a2, a1) giving
    # correlators (+, +, +, -) sqrt(2)/2 for the combination evaluated by chsh()
    psi = np.array([a1, a2, -a2, a1])
    fs = tuple(Quantity(ctx, f) for f in (f1, f2, f3, f4))
    return fs, PureEnsemble(ctx, psi)


def rescale_to_unit(f: Quantity) -> Quantity:
    """Divide by the spectral norm so that ``f^2 <= 1``."""
    n = spectral_norm(f)
    return f if n <= 1 else f / n
