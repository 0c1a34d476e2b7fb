"""Quantities, ensembles and states on finite-dimensional *-algebras.

Two realizations are supported: the commutative diagonal algebra (vectors
with pointwise operations) and the full matrix algebra. On top of them sit
ensembles (expectation functionals), uncertainty and complementarity
checks, CHSH combinations, effects and events, partial valuations
(states) and unitary dynamics.
"""
from .errors import (
    BrokenEnsembleError,
    ContextMismatchError,
    NoncommutingError,
    ParseError,
    PreconditionError,
    QFrameError,
)
from .qalgebra import (
    DIAGONAL,
    MATRIX,
    AlgebraContext,
    Quantity,
    adjoint,
    check_qalgebra_axioms,
    commutator,
    is_hermitian,
    is_positive,
    kron,
    leq,
    mul,
    pauli,
    random_quantity,
    spectral_norm,
)
from .ensembles import (
    DensityEnsemble,
    Ensemble,
    GibbsEnsemble,
    PureEnsemble,
    WeightedEnsemble,
    covariance,
    expectation,
    tensor_power,
    tensor_power_mean,
)
from .uncertainty import (
    ComplementarityCertificate,
    certify_complementarity,
    check_cauchy_schwarz,
    check_uncertainty_relation,
    truncated_oscillator,
)
# ``uncertainty`` (sigma of a quantity) lives in qframe.ensembles; the name
# qframe.uncertainty is the module with the inequality checks.
from .bell import TSIRELSON, ChshReport, build_spinpair, chsh
from .effects import Alternative, Effect, Event, and_or, check_alternative, negate, probability, relative_frequency
from .states import (
    UNDEFINED,
    ClassicalPoint,
    Copenhagen,
    EnsembleState,
    approx_product_rule,
    check_sharpness,
    mermin_peres_nogo,
    sharp_bell,
    spectrum_membership,
    value,
)
from .dynamics import (
    FixedScattering,
    HamiltonianConjugation,
    evolve_quantity,
    evolve_state,
    scattering_map,
)

__version__ = "0.1.0"
