import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qframe.dynamics import (
    FixedScattering,
    HamiltonianConjugation,
    automorphism_residuals,
    check_heisenberg_equation,
    check_von_neumann,
    evolve_quantity,
    evolve_state,
    family_from_json,
    scattering_map,
    unitary_defect,
)
from qframe.ensembles import DensityEnsemble, PureEnsemble, random_density, random_weighted
from qframe.errors import ContextMismatchError, ParseError, PreconditionError
from qframe.qalgebra import AlgebraContext, Quantity, commutator, pauli, random_quantity, spectral_norm
from qframe.states import ClassicalPoint, Copenhagen, EnsembleState

M2, M4 = AlgebraContext.matrix(2), AlgebraContext.matrix(4)
D4 = AlgebraContext.diagonal(4)
TIMES = (-1.7, -0.3, 0.3, 1.7)
seeds = st.integers(0, 2**32 - 1)


def random_family(rng, ctx=M4, hbar=1.0):
    return HamiltonianConjugation(random_quantity(ctx, rng, "hermitian"), hbar)


@pytest.mark.parametrize("hbar", [1.0, 0.4])
def test_unitary_matches_matrix_exponential(hbar, rng):
    A = random_family(rng, hbar=hbar)
    for t in TIMES:
        assert np.allclose(A.unitary(t), expm(1j * t * A.H.data / hbar), rtol=0, atol=1e-12)


def test_identity_at_time_zero(rng):
    A = random_family(rng)
    f = random_quantity(M4, rng)
    assert spectral_norm(evolve_quantity(A, f, 0) - f) <= 1e-12


def test_constants_are_fixed(rng):
    A = random_family(rng)
    assert spectral_norm(evolve_quantity(A, M4.identity(), 1.3) - 1) <= 1e-12


@pytest.mark.parametrize("s", TIMES)
@pytest.mark.parametrize("t", TIMES)
def test_group_law(s, t, rng):
    A = random_family(rng)
    f = random_quantity(M4, rng)
    r = automorphism_residuals(A, f, random_quantity(M4, rng), t, s)
    assert max(r.values()) <= 1e-12
    assert set(r) == {"scalars", "adjoint", "sum", "product", "group"}


@given(seeds)
def test_homomorphism_laws(seed):
    rng = np.random.default_rng(seed)
    for ctx in (M4, D4):
        A = random_family(rng, ctx)
        r = automorphism_residuals(A, random_quantity(ctx, rng), random_quantity(ctx, rng), float(rng.normal()))
        assert max(r.values()) <= 1e-12


def test_flip_example():
    # H = s1, psi = e1: the s3 reading oscillates as cos 2t
    A = HamiltonianConjugation(pauli(1))
    v = Copenhagen(M2, [1, 0])
    for t in (0.1, 0.7, 2.0):
        vt = evolve_state(A, EnsembleState(PureEnsemble(M2, v.psi)), t)
        assert vt(pauli(3)) == pytest.approx(math.cos(2 * t), abs=1e-12)


def test_group_law_quarter_turn():
    A = HamiltonianConjugation(pauli(3))
    q = math.pi / 4
    lhs = evolve_quantity(A, pauli(1), 2 * q)
    rhs = evolve_quantity(A, evolve_quantity(A, pauli(1), q), q)
    assert spectral_norm(lhs - rhs) <= 1e-12
    # exp(i pi/2 s3) s1 exp(-i pi/2 s3) = -s1
    assert spectral_norm(lhs + pauli(1)) <= 1e-12


def test_heisenberg_residual_falls_two_decades(rng):
    A = random_family(rng)
    f = random_quantity(M4, rng, "hermitian")
    ratio = check_heisenberg_equation(A, f, 0.4, dt=1e-2) / check_heisenberg_equation(A, f, 0.4, dt=1e-3)
    assert ratio == pytest.approx(100, rel=0.05)
    scale = spectral_norm(commutator(evolve_quantity(A, f, 0.4), A.H))
    assert check_heisenberg_equation(A, f, 0.4, dt=1e-4) <= 1e-6 * scale + 1e-9


def test_heisenberg_equation_second_order(rng):
    A = random_family(rng)
    f = random_quantity(M4, rng, "hermitian")
    coarse = check_heisenberg_equation(A, f, 0.4, dt=1e-3)
    fine = check_heisenberg_equation(A, f, 0.4, dt=5e-4)
    assert coarse / fine == pytest.approx(4, rel=0.1)
    assert check_heisenberg_equation(A, f, 0.4) <= 1e-6


def test_von_neumann_second_order(rng):
    A = random_family(rng)
    rho = random_density(M4, rng)
    coarse = check_von_neumann(A, rho, -0.8, dt=1e-3)
    fine = check_von_neumann(A, rho, -0.8, dt=5e-4)
    assert coarse / fine == pytest.approx(4, rel=0.1)
    assert check_von_neumann(A, Quantity(M4, rho.density()), -0.8) <= 1e-6


def test_commuting_quantity_is_conserved(rng):
    A = random_family(rng)
    f = A.H * 2 + 1
    assert spectral_norm(evolve_quantity(A, f, 1.1) - f) <= 1e-12
    assert check_heisenberg_equation(A, f, 1.1) <= 1e-8


def test_stationary_density(rng):
    A = random_family(rng)
    rho = DensityEnsemble(M4, expm(-A.H.data) / np.trace(expm(-A.H.data)))
    out = evolve_state(A, EnsembleState(rho), 2.3).E.density()
    assert np.allclose(out, rho.density(), rtol=0, atol=1e-12)
    assert check_von_neumann(A, rho, 2.3) <= 1e-8


def test_trace_and_positivity_preserved(rng):
    A = random_family(rng)
    E = random_density(M4, rng)
    rho_t = evolve_state(A, EnsembleState(E), 0.9).E.density()
    assert np.trace(rho_t).real == pytest.approx(1, abs=1e-12)
    assert np.linalg.eigvalsh(rho_t).min() >= -1e-12


@settings(max_examples=100)
@given(seeds)
def test_heisenberg_and_schrodinger_pictures_agree(seed):
    rng = np.random.default_rng(seed)
    ctx = M4 if seed % 2 else D4
    A = random_family(rng, ctx, hbar=float(rng.uniform(0.2, 2)))
    t = float(rng.uniform(-3, 3))
    f = random_quantity(ctx, rng, "hermitian")
    E = random_density(ctx, rng) if ctx is M4 else random_weighted(ctx, rng)
    v = EnsembleState(E)
    assert evolve_state(A, v, t)(f) == pytest.approx(v(evolve_quantity(A, f, t)), abs=1e-10)
    if ctx is M4:
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        vp = EnsembleState(PureEnsemble(M4, psi))
        assert evolve_state(A, vp, t)(f) == pytest.approx(vp(evolve_quantity(A, f, t)), abs=1e-10)


def test_copenhagen_states_follow_eigenvectors(rng):
    A = random_family(rng)
    f = random_quantity(M4, rng, "hermitian")
    w, V = np.linalg.eigh(f.data)
    vt = evolve_state(A, Copenhagen(M4, V[:, 1]), 0.6)
    # the evolved state has a value for the backward-evolved quantity
    assert vt(evolve_quantity(A, f, -0.6)) == pytest.approx(w[1], abs=1e-9)


def test_scattering_example():
    theta = 0.37
    s = Quantity(M2, expm(-1j * theta * pauli(3).data))
    out = scattering_map(s, pauli(1))
    ref = math.cos(2 * theta) * pauli(1) + math.sin(2 * theta) * pauli(2)
    assert spectral_norm(out - ref) <= 1e-12
    r = automorphism_residuals(FixedScattering(s), pauli(1), pauli(2), 1)
    assert max(r.values()) <= 1e-12


def test_scattering_only_at_zero_and_one():
    S = FixedScattering(pauli(2))
    assert spectral_norm(evolve_quantity(S, pauli(3), 0) - pauli(3)) == 0
    assert spectral_norm(evolve_quantity(S, pauli(3), 1) + pauli(3)) <= 1e-15
    with pytest.raises(PreconditionError, match="t = 0 or t = 1"):
        evolve_quantity(S, pauli(3), 0.5)
    with pytest.raises(PreconditionError):
        check_heisenberg_equation(S, pauli(3), 0.0)


def test_unitarity_is_required():
    with pytest.raises(PreconditionError, match="not unitary"):
        FixedScattering(Quantity(M2, np.diag([1, 2])))
    assert unitary_defect(pauli(1)) == 0


def test_evolution_is_deterministic(rng):
    A = random_family(rng)
    f = random_quantity(M4, rng)
    assert np.array_equal(evolve_quantity(A, f, 0.77).data, evolve_quantity(A, f, 0.77).data)


def test_preconditions(rng):
    A = random_family(rng)
    with pytest.raises(PreconditionError, match="classical point"):
        evolve_state(HamiltonianConjugation(Quantity(D4, [1, 2, 3, 4])), ClassicalPoint(D4, 0), 1)
    with pytest.raises(ContextMismatchError):
        evolve_quantity(A, pauli(1), 1)
    with pytest.raises(PreconditionError, match="Hermitian"):
        HamiltonianConjugation(Quantity(M2, [[0, 1], [0, 0]]))
    with pytest.raises(PreconditionError, match="hbar"):
        HamiltonianConjugation(pauli(1), hbar=0)
    with pytest.raises(ValueError):
        check_von_neumann(A, random_density(M4, rng), 0, dt=0)


def test_json_round_trip(rng):
    for fam in (random_family(rng, hbar=0.5), FixedScattering(pauli(1))):
        back = family_from_json(json.loads(json.dumps(fam.to_json())))
        assert np.allclose(back.unitary(1), fam.unitary(1), atol=1e-12)


def test_json_diagnostics():
    with pytest.raises(ParseError, match="kind"):
        family_from_json([])
    with pytest.raises(ParseError, match="missing field 'H'"):
        family_from_json({"kind": "hamiltonian"})
    with pytest.raises(ParseError, match="hbar"):
        family_from_json({"kind": "hamiltonian", "H": {"ctx": M2.to_json(), "data": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]}, "hbar": "1"})
    with pytest.raises(ParseError, match="unknown family kind"):
        family_from_json({"kind": "lindblad"})
