"""Closed-form demonstrations reproducing the reference numbers.

Physical constants are kept at the quoted three-digit precision, not at
CODATA values, so the relative errors measure reproduction of the
reference figures. Every demo accepts overrides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bell import ChshReport, build_spinpair, chsh
from .effects import elementary_event, relative_frequency
from .ensembles import PureEnsemble
from .qalgebra import AlgebraContext
from .states import mermin_peres_nogo

BOHR_RADIUS = 5.29e-11  # m
PROTON_MASS = 1.67e-27  # kg
MOON_MASS = 7.35e22  # kg
NUCLEONS_PER_ATOM = 20
RADIAL_CUTOFF = 40.0  # in Bohr radii; the integrand is below 1e-30 of its peak beyond


@dataclass
class Figure:
    value: float
    unit: str = ""
    reference: float | None = None
    tolerance: float | None = None  # relative, or absolute when the reference is 0

    @property
    def error(self) -> float | None:
        if self.reference is None:
            return None
        if self.reference == 0:
            return abs(self.value)
        return abs(self.value - self.reference) / abs(self.reference)

    @property
    def ok(self) -> bool:
        return self.tolerance is None or self.error is None or self.error <= self.tolerance

    def to_json(self) -> dict:
        return {"value": self.value, "unit": self.unit, "reference": self.reference,
                "error": self.error, "tolerance": self.tolerance, "ok": self.ok}


@dataclass
class DemoResult:
    name: str
    figures: dict[str, Figure]
    details: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(f.ok for f in self.figures.values()) and all(self.checks.values())

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "figures": {k: f.to_json() for k, f in self.figures.items()},
                "checks": dict(self.checks), "details": self.details}


def cmd_chsh(tol: float = 1e-10) -> DemoResult:
    fs, E = build_spinpair()
    r: ChshReport = chsh(E, *fs)
    half = math.sqrt(2) / 2
    figures = {"gamma": Figure(r.gamma, "", 2 * math.sqrt(2), tol)}
    for k, (c, ref) in enumerate(zip(r.correlators, (half, half, half, -half))):
        figures[f"correlator_{k + 1}"] = Figure(c, "", ref, tol)
    for k, s in enumerate(r.singles):
        figures[f"single_{k + 1}"] = Figure(s, "", 0.0, tol)
    return DemoResult("chsh", figures, details=r.to_json(),
                      checks={"tsirelson_ok": r.tsirelson_ok, "classical_bound_violated": not r.classical_ok})


def cmd_mermin_peres(tol: float = 1e-12) -> DemoResult:
    fs, _ = build_spinpair()
    base = mermin_peres_nogo(*fs, tol=tol)
    flipped = mermin_peres_nogo(fs[0], -fs[1], fs[2], fs[3], tol=tol)
    figures = {
        "consistent_assignments": Figure(float(base.consistent_assignments), "of 16", 0.0, 0.0),
        "consistent_assignments_f2_negated": Figure(float(flipped.consistent_assignments), "of 16", 0.0, 0.0),
        "max_relation_residual": Figure(max(base.residuals.values()), "", 0.0, tol),
    }
    return DemoResult("mermin-peres", figures, details={"spinpair": base.to_json(), "f2_negated": flipped.to_json()},
                      checks={"relations_ok": base.relations_ok, "relations_ok_f2_negated": flipped.relations_ok})


def radial_moment(k: int, cutoff: float = RADIAL_CUTOFF) -> float:
    """``<r^k>`` in units of r0 for the density ``exp(-2r/r0)`` on [0, cutoff r0]."""
    opts = dict(epsrel=1e-9, epsabs=0.0, limit=200)
    num, _ = integrate.quad(lambda r: r ** (k + 2) * math.exp(-2 * r), 0.0, cutoff, **opts)
    den, _ = integrate.quad(lambda r: r * r * math.exp(-2 * r), 0.0, cutoff, **opts)
    return num / den


def cmd_hydrogen(r0: float = BOHR_RADIUS, tol: float = 1e-6) -> DemoResult:
    """Reference radius ``<r>`` and spread ``sqrt(<r^2>)`` of the hydrogen ground state."""
    mean_r = radial_moment(1)
    spread = math.sqrt(radial_moment(2))
    figures = {
        "mean_radius_r0": Figure(mean_r, "r0", 1.5, tol),
        "position_spread_r0": Figure(spread, "r0", math.sqrt(3), tol),
        "normalization": Figure(radial_moment(0), "", 1.0, tol),
        "mean_radius": Figure(mean_r * r0, "m"),
        "position_spread": Figure(spread * r0, "m"),
    }
    return DemoResult("hydrogen", figures, details={"r0": r0, "cutoff_r0": RADIAL_CUTOFF, "epsrel": 1e-9})


def cmd_moon(moon_mass: float = MOON_MASS, proton_mass: float = PROTON_MASS,
             nucleons: float = NUCLEONS_PER_ATOM, r0: float = BOHR_RADIUS, tol: float = 5e-3) -> DemoResult:
    """Atom count of the Moon and the spread of its center of mass, ``r0/sqrt(N)``."""
    n_atoms = moon_mass / (nucleons * proton_mass)
    sigma = r0 / math.sqrt(n_atoms)
    quoted = (moon_mass, proton_mass, nucleons, r0) == (MOON_MASS, PROTON_MASS, NUCLEONS_PER_ATOM, BOHR_RADIUS)
    figures = {
        "atoms": Figure(n_atoms, "", 2.20e48 if quoted else None, tol),
        "center_of_mass_spread": Figure(sigma, "m", 3.567e-35 if quoted else None, tol),
    }
    details = {"moon_mass": moon_mass, "proton_mass": proton_mass, "nucleons_per_atom": nucleons, "r0": r0,
               "atoms_4sig": f"{n_atoms:.4g}", "center_of_mass_spread_4sig": f"{sigma:.4g}"}
    return DemoResult("moon", figures, details=details)


def cmd_weak_law(probabilities=(0.2, 0.5, 0.9), max_copies: int = 6, seed: int = 0,
                 tol: float = 1e-10) -> DemoResult:
    """``sigma(q) sqrt(N) = sqrt(p(1-p))`` for the relative frequency of a qubit event.

    The event direction is drawn from the seed; the state is chosen so the
    event has probability exactly p.
    """
    rng = np.random.default_rng(seed)
    ctx = AlgebraContext.matrix(2)
    figures = {}
    for p in probabilities:
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        phi = z / np.linalg.norm(z)
        perp = np.array([-phi[1].conjugate(), phi[0].conjugate()])
        E = PureEnsemble(ctx, math.sqrt(p) * phi + math.sqrt(1 - p) * perp)
        e = elementary_event(phi, ctx)
        for n in range(1, max_copies + 1):
            mean, sigma = relative_frequency(E, e, n)
            figures[f"p={p:g},N={n}:sigma_sqrtN"] = Figure(sigma * math.sqrt(n), "", math.sqrt(p * (1 - p)), tol)
            figures[f"p={p:g},N={n}:mean"] = Figure(mean, "", p, tol)
    return DemoResult("weak-law", figures, details={"seed": seed})
