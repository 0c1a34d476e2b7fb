import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qframe.bell import build_spinpair
from qframe.ensembles import PureEnsemble, WeightedEnsemble, random_density, random_weighted
from qframe.errors import ContextMismatchError, NoncommutingError, ParseError, PreconditionError
from qframe.qalgebra import AlgebraContext, Quantity, adjoint, kron, mul, pauli, random_quantity
from qframe.states import (
    MAX_CLOSURE,
    SHARP_RULES,
    UNDEFINED,
    ClassicalPoint,
    Copenhagen,
    EnsembleState,
    approx_product_rule,
    check_sharpness,
    is_defined,
    mermin_peres_nogo,
    pure_state,
    sharp_bell,
    spectrum_membership,
    valuation_from_json,
    value,
)

M2, M4 = AlgebraContext.matrix(2), AlgebraContext.matrix(4)
D4 = AlgebraContext.diagonal(4)
PLUS = np.array([1, 1]) / math.sqrt(2)
seeds = st.integers(0, 2**32 - 1)


# ---- values

def test_value_examples():
    assert value(ClassicalPoint(D4, 2), Quantity(D4, [5, 6, 7, 8])) == 7.0
    assert value(Copenhagen(M2, [1, 0]), pauli(3)) == 1.0
    assert value(Copenhagen(M2, [0, 1]), pauli(3)) == -1.0
    assert value(pure_state(M2, PLUS), pauli(1)) == pytest.approx(1, abs=1e-15)
    assert value(pure_state(M2, PLUS), pauli(3)) == pytest.approx(0, abs=1e-15)
    assert value(ClassicalPoint(D4, 0), 3.5) == 3.5


def test_copenhagen_undefined_with_diagnostic():
    v = Copenhagen(M2, [1, 0])
    assert v(pauli(1)) is UNDEFINED
    assert "not an eigenvector" in v.last_diagnostic


def test_non_hermitian_values_are_complex():
    v = ClassicalPoint(D4, 1)
    assert value(v, Quantity(D4, [0, 1j, 0, 0])) == 1j


def test_value_preconditions():
    with pytest.raises(ContextMismatchError):
        value(ClassicalPoint(D4, 0), pauli(1))
    with pytest.raises(PreconditionError):
        ClassicalPoint(M2, 0)
    with pytest.raises(PreconditionError):
        ClassicalPoint(D4, 4)
    with pytest.raises(PreconditionError):
        Copenhagen(D4, [1, 0, 0, 0])
    with pytest.raises(PreconditionError):
        Copenhagen(M2, [0, 0])


def test_undefined_arithmetic():
    assert repr(UNDEFINED) == "?"
    assert not is_defined(UNDEFINED) and is_defined(0.0)
    for out in (UNDEFINED + 1, 2 - UNDEFINED, UNDEFINED * 3, 1 / UNDEFINED, UNDEFINED**2, -UNDEFINED, abs(UNDEFINED)):
        assert out is UNDEFINED
    assert 0 * UNDEFINED == 0 and UNDEFINED * 0.0 == 0
    assert UNDEFINED * UNDEFINED is UNDEFINED


# ---- ensemble states: linearity, monotony, embedding, range

@given(seeds)
def test_ensemble_state_is_linear(seed):
    rng = np.random.default_rng(seed)
    v = EnsembleState(random_density(M4, rng))
    f, g = random_quantity(M4, rng, "hermitian"), random_quantity(M4, rng, "hermitian")
    a, b = rng.normal(size=2)
    assert v(a * f + b * g) == pytest.approx(a * v(f) + b * v(g), abs=1e-10)


@given(seeds)
def test_ensemble_state_is_monotone_and_embeds_scalars(seed):
    rng = np.random.default_rng(seed)
    v = EnsembleState(random_density(M4, rng))
    f = random_quantity(M4, rng, "hermitian")
    z = random_quantity(M4, rng)
    assert v(f + mul(adjoint(z), z)) >= v(f) - 1e-10
    c = float(rng.normal())
    assert v(M4.scalar(c)) == pytest.approx(c, abs=1e-12)


@given(seeds)
def test_ensemble_values_lie_in_convex_hull_of_spectrum(seed):
    rng = np.random.default_rng(seed)
    for ctx, E in ((M4, random_density(M4, rng)), (D4, random_weighted(D4, rng))):
        f = random_quantity(ctx, rng, "hermitian")
        lam = np.linalg.eigvalsh(np.diag(f.data) if ctx.is_diagonal else f.data)
        assert lam[0] - 1e-10 <= EnsembleState(E)(f) <= lam[-1] + 1e-10


# ---- sharpness

@given(seeds)
def test_classical_points_are_sharp(seed):
    rng = np.random.default_rng(seed)
    fs = [random_quantity(D4, rng, "hermitian") for _ in range(2)]
    r = check_sharpness(ClassicalPoint(D4, int(rng.integers(4))), fs, closure_depth=1)
    assert r.verdict and not r.witnesses
    assert set(r.residuals) == set(SHARP_RULES)


def test_classical_point_sharp_on_default_closure(rng):
    fs = [random_quantity(D4, rng, "hermitian") for _ in range(2)]
    r = check_sharpness(ClassicalPoint(D4, 2), fs)
    assert r.verdict and r.closure_depth == 2 and r.set_size > 8


def test_copenhagen_is_sharp_on_its_eigenquantities():
    r = check_sharpness(Copenhagen(M2, [1, 0]), [pauli(3)])
    assert r.verdict and r.set_size > 1


def test_copenhagen_fails_on_undefined_member():
    r = check_sharpness(Copenhagen(M2, [1, 0]), [pauli(3), pauli(1)])
    assert not r.verdict
    assert math.isinf(r.residuals["real_values"])
    assert r.to_json()["residuals"]["real_values"] == "undefined"


def test_superposition_is_not_sharp():
    r = check_sharpness(pure_state(M2, PLUS), [pauli(3)], closure_depth=0)
    assert not r.verdict
    assert r.residuals["squares"] == pytest.approx(1, abs=1e-12)
    assert ("squares", ("f1",), pytest.approx(1, abs=1e-12)) in r.witnesses


def test_closure_is_capped(rng):
    fs = [random_quantity(D4, rng, "hermitian") for _ in range(4)]
    r = check_sharpness(ClassicalPoint(D4, 0), fs, closure_depth=3)
    assert r.truncated and r.set_size == MAX_CLOSURE
    assert r.verdict


def test_sharpness_report_json(rng):
    r = check_sharpness(ClassicalPoint(D4, 1), [random_quantity(D4, rng, "hermitian")])
    out = json.loads(json.dumps(r.to_json()))
    assert out["verdict"] is True and out["closure_depth"] == 2


def test_sharpness_rejects_non_hermitian_members():
    with pytest.raises(PreconditionError):
        check_sharpness(ClassicalPoint(D4, 0), [Quantity(D4, [1j, 0, 0, 0])])


# ---- spectrum

def test_sharp_values_are_eigenvalues():
    r = spectrum_membership(Copenhagen(M2, [0, 1]), pauli(3))
    assert r.value == -1 and r.member and r.distance <= 1e-12
    assert not r.is_event and r.dichotomic is None
    e = spectrum_membership(Copenhagen(M2, [1, 0]), Quantity(M2, np.diag([1, 0])))
    assert e.is_event and e.dichotomic and e.value == 1


@given(seeds)
def test_classical_values_are_in_spectrum(seed):
    rng = np.random.default_rng(seed)
    f = random_quantity(D4, rng, "hermitian")
    r = spectrum_membership(ClassicalPoint(D4, int(rng.integers(4))), f)
    assert r.member and r.distance == 0


def test_spectrum_negative_control():
    with pytest.raises(PreconditionError, match="not sharp"):
        spectrum_membership(pure_state(M2, PLUS), pauli(3))
    with pytest.raises(PreconditionError, match="no value"):
        spectrum_membership(Copenhagen(M2, [1, 0]), pauli(1))


# ---- the four-quantity no-go result

def test_mermin_peres_has_no_consistent_assignment():
    fs, _ = build_spinpair()
    r = mermin_peres_nogo(*fs)
    assert r.relations_ok and r.sign == -1
    assert r.consistent_assignments == 0
    assert max(r.residuals.values()) <= 1e-12
    negated = mermin_peres_nogo(fs[0], -fs[1], fs[2], fs[3])
    assert negated.relations_ok and negated.consistent_assignments == 0


def test_mermin_peres_counts_all_when_relations_fail():
    one = M4.identity()
    r = mermin_peres_nogo(one, one, one, one)
    assert not r.relations_ok and r.sign == 1
    assert r.consistent_assignments == 16
    assert r.residuals["{f1,f3}"] == pytest.approx(2)


def test_mermin_peres_on_commuting_diagonal_signs():
    d = AlgebraContext.diagonal(2)
    f = Quantity(d, [1, -1])
    r = mermin_peres_nogo(f, f, f, f)
    assert not r.relations_ok and r.consistent_assignments == 16


# ---- Bell bound for sharp states

@given(seeds)
def test_sharp_bell_for_classical_points(seed):
    rng = np.random.default_rng(seed)
    fs = [Quantity(D4, rng.choice([-1.0, 1.0], 4)) for _ in range(4)]
    gamma, holds = sharp_bell(ClassicalPoint(D4, int(rng.integers(4))), *fs)
    assert holds and gamma in (0.0, 2.0)


def test_sharp_bell_reaches_boundary():
    one = D4.identity()
    gamma, holds = sharp_bell(ClassicalPoint(D4, 0), one, one, one, one)
    assert gamma == 2 and holds


def test_sharp_bell_on_joint_eigenvector():
    # f1, f2, f4 share e1 x e1 as an eigenvector; f3 = f1 keeps the quadruple commuting
    one = M2.identity()
    s3 = pauli(3)
    fs = (kron(s3, one), kron(one, s3), kron(s3, one), kron(one, s3))
    gamma, holds = sharp_bell(Copenhagen(M4, np.kron([1, 0], [1, 0])), *fs)
    assert gamma == pytest.approx(2) and holds


def test_sharp_bell_rejects_spinpair():
    fs, E = build_spinpair()
    with pytest.raises(PreconditionError, match="rule squares fails on f1"):
        sharp_bell(EnsembleState(E), *fs)


def test_sharp_bell_preconditions():
    fs, E = build_spinpair()
    with pytest.raises(PreconditionError, match="f2"):
        sharp_bell(EnsembleState(E), fs[0], 2 * fs[1], fs[2], fs[3])
    with pytest.raises(NoncommutingError):
        sharp_bell(EnsembleState(E), fs[0], fs[2], fs[1], fs[3])
    with pytest.raises(PreconditionError, match="value"):
        sharp_bell(Copenhagen(M4, np.kron([1, 0], [1, 0])), *fs)


# ---- approximate product rule

@given(seeds)
def test_approximate_product_rule(seed):
    rng = np.random.default_rng(seed)
    u = random_quantity(M4, rng, "unitary").data
    f = Quantity(M4, u @ np.diag(rng.normal(size=4)) @ u.conj().T)
    g = Quantity(M4, u @ np.diag(rng.normal(size=4)) @ u.conj().T)
    lhs, bound, holds = approx_product_rule(EnsembleState(random_density(M4, rng)), f, g)
    assert holds and lhs <= bound + 1e-10


def test_approximate_product_rule_is_exact_on_sharp_ensembles():
    f = Quantity(D4, [1, 2, 3, 4])
    g = Quantity(D4, [0, -1, 5, 2])
    lhs, bound, holds = approx_product_rule(EnsembleState(WeightedEnsemble(D4, [0, 0, 1, 0])), f, g)
    assert lhs == pytest.approx(0, abs=1e-12) and bound == pytest.approx(0, abs=1e-7) and holds


def test_approximate_product_rule_preconditions():
    with pytest.raises(NoncommutingError):
        approx_product_rule(pure_state(M2, PLUS), pauli(1), pauli(3))
    with pytest.raises(PreconditionError):
        approx_product_rule(Copenhagen(M2, [1, 0]), pauli(3), pauli(3))


# ---- JSON

def test_valuation_json_round_trip():
    for v in (ClassicalPoint(D4, 3), Copenhagen(M2, [1, 1j]), EnsembleState(PureEnsemble(M2, PLUS))):
        back = valuation_from_json(json.loads(json.dumps(v.to_json())))
        assert type(back) is type(v)
        f = Quantity(v.ctx, np.diag([1.0, -1.0])) if not v.ctx.is_diagonal else Quantity(D4, [1, 2, 3, 4])
        a, b = v(f), back(f)
        assert (a is UNDEFINED and b is UNDEFINED) or a == pytest.approx(b, abs=1e-12)


def test_valuation_json_diagnostics():
    with pytest.raises(ParseError, match="kind"):
        valuation_from_json({"omega": 1})
    with pytest.raises(ParseError, match="omega"):
        valuation_from_json({"kind": "classical_point", "ctx": D4.to_json(), "omega": "2"})
    with pytest.raises(ParseError, match="unknown state kind"):
        valuation_from_json({"kind": "hidden", "ctx": D4.to_json()})
    with pytest.raises(ParseError, match="out of range"):
        valuation_from_json({"kind": "classical_point", "ctx": D4.to_json(), "omega": 9})
