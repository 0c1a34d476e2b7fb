"""Effects (0 <= e <= 1), events (e^2 = e = e*), alternatives and probabilities."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensembles import Ensemble, tensor_power, uncertainty, mean_quantity
from .errors import NoncommutingError, ParseError, PreconditionError
from .qalgebra import (
    Quantity,
    commutator,
    hermitian_defect,
    min_eigenvalue,
    mul,
    quantity_from_json,
    quantity_to_json,
    spectral_norm,
)

LOGIC_TOL = 1e-10


def _effect_defect(q: Quantity) -> float:
    """Distance from the effect conditions ``q = q*``, ``q >= 0``, ``1 - q >= 0``."""
    lo = min_eigenvalue(q)
    hi = 1.0 - min_eigenvalue(1 - q)
    return max(hermitian_defect(q), -lo, hi - 1.0, 0.0)


def _event_defect(q: Quantity) -> float:
    return max(spectral_norm(mul(q, q) - q), hermitian_defect(q))


class Effect:
    """A quantity between 0 and 1; construction validates, never repairs."""

    role = "effect"

    def __init__(self, q: Quantity):
        defect = _effect_defect(q)
        if defect > LOGIC_TOL:
            raise PreconditionError(f"not an effect: eigenvalues leave [0, 1] by {defect:.3g}")
        self.q = q

    @property
    def ctx(self):
        return self.q.ctx

    def is_event(self) -> bool:
        return _event_defect(self.q) <= LOGIC_TOL

    def __repr__(self):
        return f"{type(self).__name__}({self.q!r})"

    def to_json(self) -> dict:
        return quantity_to_json(self.q, role=self.role)


class Event(Effect):
    """A Hermitian idempotent."""

    role = "event"

    def __init__(self, q: Quantity):
        defect = _event_defect(q)
        if defect > LOGIC_TOL:
            raise PreconditionError(f"not an event: |e^2 - e| + hermiticity defect {defect:.3g}")
        super().__init__(q)


def as_effect(q: Quantity) -> Effect:
    """Wrap as :class:`Event` when idempotent, else as :class:`Effect`."""
    return Event(q) if _event_defect(q) <= LOGIC_TOL else Effect(q)


def elementary_event(phi, ctx) -> Event:
    """The projector ``phi phi*`` for a unit vector phi."""
    v = np.asarray(phi, dtype=complex)
    v = v / np.linalg.norm(v)
    return Event(Quantity(ctx, np.outer(v, v.conj())))


def probability(E: Ensemble, e: Effect) -> float:
    val = E(e.q)
    if abs(val.imag) > LOGIC_TOL:
        raise PreconditionError(f"probability has imaginary part {val.imag:.3g}")
    return float(val.real)


def negate(e: Effect) -> Effect:
    out = 1 - e.q
    return Event(out) if isinstance(e, Event) else Effect(out)


def _require_commuting(e: Effect, e2: Effect) -> None:
    c = spectral_norm(commutator(e.q, e2.q))
    if c > LOGIC_TOL:
        raise NoncommutingError(
            f"'and' and 'or' are undefined for noncommuting effects (|[e, e']| = {c:.3g})", c
        )


def and_or(e: Effect, e2: Effect) -> tuple[Effect, Effect]:
    """``(e and e', e or e') = (e e', e + e' - e e')`` for commuting effects."""
    _require_commuting(e, e2)
    prod = mul(e.q, e2.q)
    # symmetrize away the rounding-level commutator so the result stays Hermitian
    prod = (prod + mul(e2.q, e.q)) / 2
    both_events = isinstance(e, Event) and isinstance(e2, Event)
    wrap = Event if both_events else Effect
    return wrap(prod), wrap(e.q + e2.q - prod)


def is_independent(E: Ensemble, e: Effect, e2: Effect) -> bool:
    _require_commuting(e, e2)
    return abs(E(mul(e.q, e2.q)) - E(e.q) * E(e2.q)) <= LOGIC_TOL


def symmetrized_product(e: Effect, e2: Effect) -> Quantity:
    """``(e e' + e' e)/2``; for noncommuting effects this need not be an effect."""
    return (mul(e.q, e2.q) + mul(e2.q, e.q)) / 2


@dataclass
class Alternative:
    members: list

    def total(self) -> Quantity:
        out = self.members[0].q
        for m in self.members[1:]:
            out = out + m.q
        return out


@dataclass
class AlternativeReport:
    sum_defect: float
    all_events: bool
    overlaps: list = field(default_factory=list)  # (k, l, |e_k e_l|) above tolerance

    @property
    def valid(self) -> bool:
        return self.sum_defect <= LOGIC_TOL and not self.overlaps


def check_alternative(a: Alternative) -> AlternativeReport:
    """Check ``sum e_l <= 1`` and, for events, pairwise disjointness."""
    if not a.members:
        raise ValueError("an alternative needs at least one member")
    rest = 1 - a.total()
    defect = max(-min_eigenvalue(rest), hermitian_defect(rest), 0.0)
    all_events = all(m.is_event() for m in a.members)
    overlaps = []
    if all_events:
        for k, ek in enumerate(a.members):
            for l in range(k + 1, len(a.members)):
                el = a.members[l]
                size = max(spectral_norm(mul(ek.q, el.q)), spectral_norm(mul(el.q, ek.q)))
                if size > LOGIC_TOL:
                    overlaps.append((k, l, size))
    return AlternativeReport(defect, all_events, overlaps)


def relative_frequency(E: Ensemble, e: Effect, N: int) -> tuple[float, float]:
    """Expectation and uncertainty of ``q = (1/N) sum_l e_l`` over N independent copies."""
    EN = tensor_power(E, N)
    q = mean_quantity(e.q, N)
    return float(EN(q).real), uncertainty(EN, q)


def effect_from_json(obj, tol: float | None = None) -> Effect:
    q = quantity_from_json(obj, tol)
    role = obj.get("role", "effect")
    try:
        if role == "event":
            return Event(q)
        if role == "effect":
            return Effect(q)
    except PreconditionError as exc:
        raise ParseError(str(exc)) from None
    raise ParseError(f"unknown role {role!r}; expected 'effect' or 'event'")
