"""Command-line front end.

Every command prints a report (``--json`` for machine-readable output with
the same numbers) and exits 0 when all checks pass, 1 on an invariant
failure and 2 on an I/O or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any

import numpy as np

from . import demos
from .bell import chsh
from .dynamics import HamiltonianConjugation, automorphism_residuals, evolve_quantity, evolve_state, family_from_json
from .effects import effect_from_json, elementary_event, probability
from .ensembles import PureEnsemble, ensemble_from_json, random_density, random_weighted
from .errors import ParseError, QFrameError
from .qalgebra import (
    AlgebraContext,
    adjoint,
    check_qalgebra_axioms,
    context_from_json,
    mul,
    pauli,
    quantity_from_json,
    quantity_to_json,
    random_quantity,
)
from .states import valuation_from_json
from .uncertainty import certify_complementarity, complementarity_objective

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2


class InputError(Exception):
    """Raised for unreadable or malformed input; maps to exit code 2."""


# ---------------------------------------------------------------- output

def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, obj)]


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
        return
    # repr keeps full precision, so the text carries the same numbers as --json
    for key, val in _flatten(report):
        print(f"{key}: {val!r}" if isinstance(val, float) else f"{key}: {val}")


def _load(path: str | None) -> Any:
    if path is None:
        raise InputError("this command needs --file")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _field(obj: Any, key: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"input is missing field {key!r}")
    return obj[key]


# ---------------------------------------------------------------- commands

def _demo(result: demos.DemoResult, args) -> dict:
    out = result.to_json()
    out["seed"] = args.seed
    return out


def run_chsh(args) -> dict:
    if not args.file:
        return _demo(demos.cmd_chsh(tol=args.tol or 1e-10), args)
    obj = _load(args.file)
    E = ensemble_from_json(_field(obj, "ensemble"), args.tol)
    fs = _field(obj, "quantities")
    if not isinstance(fs, list) or len(fs) != 4:
        raise InputError("'quantities' must be a list of four quantities")
    report = chsh(E, *(quantity_from_json(f, args.tol) for f in fs)).to_json()
    report["seed"] = args.seed
    report["checks"] = {"tsirelson_ok": report["tsirelson_ok"]}
    if report["classical_bound_applicable"]:
        report["checks"]["classical_ok"] = report["classical_ok"]
    report["passed"] = all(report["checks"].values())
    return report


def run_mermin_peres(args) -> dict:
    return _demo(demos.cmd_mermin_peres(tol=args.tol or 1e-12), args)


def run_hydrogen(args) -> dict:
    return _demo(demos.cmd_hydrogen(r0=args.r0, tol=args.tol or 1e-6), args)


def run_moon(args) -> dict:
    return _demo(demos.cmd_moon(args.moon_mass, args.proton_mass, args.nucleons, args.r0, tol=args.tol or 5e-3), args)


def run_weak_law(args) -> dict:
    return _demo(demos.cmd_weak_law(args.p, args.max_copies, args.seed, tol=args.tol or 1e-10), args)


def run_complementarity(args) -> dict:
    if args.file:
        obj = _load(args.file)
        f = quantity_from_json(_field(obj, "f"), args.tol)
        g = quantity_from_json(_field(obj, "g"), args.tol)
    else:
        ctx = AlgebraContext.matrix(2)
        f, g = pauli(1, ctx), pauli(3, ctx)
    cert = certify_complementarity(f, g, range=args.range, coarse_steps=args.steps)
    # independent check: eigenvalue objective at the reported minimizer
    lam = complementarity_objective(f, g, cert.argmin_x, cert.argmin_y)
    tol = args.tol or 1e-8
    agree = abs(lam - cert.gamma ** 2) <= tol * max(1.0, lam)
    report = {"seed": args.seed, "passed": agree, "certificate": cert.to_json(),
              "objective_at_minimizer": lam, "checks": {"eigenvalue_agreement": agree}}
    if not args.file:
        report["checks"]["pauli_gamma_is_1"] = abs(cert.gamma - 1.0) <= 1e-6
        report["passed"] = all(report["checks"].values())
    return report


def run_evolve(args) -> dict:
    obj = _load(args.file)
    A = family_from_json(_field(obj, "family"), args.tol)
    t = _field(obj, "t")
    if not isinstance(t, (int, float)) or isinstance(t, bool):
        raise InputError(f"t must be a number, got {t!r}")
    rng = np.random.default_rng(args.seed)
    probe = random_quantity(A.ctx, rng, "general")
    report: dict = {"seed": args.seed, "t": t}
    if "quantity" in obj:
        f = quantity_from_json(obj["quantity"], args.tol)
        report["evolved_quantity"] = quantity_to_json(evolve_quantity(A, f, t))
    elif "state" in obj:
        v = valuation_from_json(obj["state"], args.tol)
        report["evolved_state"] = evolve_state(A, v, t).to_json()
        f = probe
    else:
        raise InputError("input needs a 'quantity' or a 'state' field")
    res = automorphism_residuals(A, f, probe, t)
    tol = args.tol or 1e-10
    report["residuals"] = res
    report["passed"] = all(r <= tol for r in res.values())
    return report


def _ensemble_residuals(ctx: AlgebraContext, samples: int, rng) -> dict[str, float]:
    worst = dict.fromkeys(("linearity", "conjugation", "positivity", "normalization"), 0.0)
    for _ in range(samples):
        E = random_weighted(ctx, rng) if ctx.is_diagonal else random_density(ctx, rng)
        f, g = random_quantity(ctx, rng), random_quantity(ctx, rng)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        scale = 1 + abs(E(f)) + abs(E(g))
        worst["linearity"] = max(worst["linearity"], abs(E(a * f + b * g) - a * E(f) - b * E(g)) / (scale * (abs(a) + abs(b))))
        worst["conjugation"] = max(worst["conjugation"], abs(E(adjoint(f)) - np.conj(E(f))) / scale)
        ff = E(mul(adjoint(f), f))
        worst["positivity"] = max(worst["positivity"], max(-ff.real, abs(ff.imag), 0.0) / scale)
        worst["normalization"] = max(worst["normalization"], abs(E(ctx.identity()) - 1))
    return worst


def run_axioms(args) -> dict:
    if args.file:
        ctx = context_from_json(_load(args.file), args.tol)
    else:
        ctx = AlgebraContext(args.kind, args.dim)
    threshold = args.tol or 1e-10
    report = check_qalgebra_axioms(ctx, samples=args.samples, seed=args.seed, threshold=threshold)
    rng = np.random.default_rng(args.seed)
    sections = {"algebra": dict(report.residuals), "ensemble": _ensemble_residuals(ctx, args.samples, rng)}
    auto: dict[str, float] = {}
    for _ in range(max(1, args.samples // 10)):
        A = HamiltonianConjugation(random_quantity(ctx, rng, "hermitian"), 1.0)
        f, g = random_quantity(ctx, rng), random_quantity(ctx, rng)
        for k, r in automorphism_residuals(A, f, g, float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2))).items():
            auto[k] = max(auto.get(k, 0.0), r)
    sections["automorphism"] = auto
    failing = [f"{sec}.{name}" for sec, vals in sections.items() for name, r in vals.items() if not r <= threshold]
    return {"seed": args.seed, "context": ctx.to_json(), "samples": args.samples, "threshold": threshold,
            "passed": not failing, "first_failure": failing[0] if failing else None, "residuals": sections}


def run_probability(args) -> dict:
    tol = args.tol or 1e-12
    if args.file:
        obj = _load(args.file)
        E = ensemble_from_json(_field(obj, "ensemble"), args.tol)
        e = effect_from_json(_field(obj, "effect"), args.tol)
        p = probability(E, e)
        ok = bool(-1e-10 <= p <= 1 + 1e-10)
        return {"seed": args.seed, "probability": p, "role": e.role, "passed": ok, "checks": {"in_unit_interval": ok}}
    # seeded elementary event against a seeded pure state
    rng = np.random.default_rng(args.seed)
    ctx = AlgebraContext.matrix(args.dim)
    z = rng.normal(size=(2, args.dim)) + 1j * rng.normal(size=(2, args.dim))
    phi, psi = z[0] / np.linalg.norm(z[0]), z[1] / np.linalg.norm(z[1])
    p = probability(PureEnsemble(ctx, psi), elementary_event(phi, ctx))
    amp = abs(np.vdot(phi, psi)) ** 2
    ok = bool(abs(p - amp) <= tol)
    return {"seed": args.seed, "probability": p, "squared_amplitude": float(amp), "passed": ok,
            "checks": {"matches_squared_amplitude": ok}}


COMMANDS = {
    "chsh": (run_chsh, "CHSH combination (spin-pair construction, or a quadruple from --file)"),
    "mermin-peres": (run_mermin_peres, "no-go enumeration for four spin quantities"),
    "hydrogen": (run_hydrogen, "reference radius and spread of the hydrogen ground state"),
    "moon": (run_moon, "center-of-mass spread of the Moon"),
    "weak-law": (run_weak_law, "uncertainty of the relative frequency over N copies"),
    "complementarity": (run_complementarity, "certify (f-x)^2 + (g-y)^2 >= gamma^2"),
    "evolve": (run_evolve, "evolve a quantity or a state under an automorphism family"),
    "axioms": (run_axioms, "check algebra, ensemble and automorphism laws on random samples"),
    "probability": (run_probability, "probability of an effect in an ensemble"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (printed in the output)")
    common.add_argument("--tol", type=float, default=None,
                        help="pass threshold; for file input also the context positivity tolerance")
    common.add_argument("--file", default=None, help="JSON input file")

    parser = argparse.ArgumentParser(prog="qframe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    cmds = {name: sub.add_parser(name, parents=[common], help=text) for name, (_, text) in COMMANDS.items()}

    for name in ("hydrogen", "moon"):
        cmds[name].add_argument("--r0", type=float, default=demos.BOHR_RADIUS, help="Bohr radius in m")
    cmds["moon"].add_argument("--moon-mass", type=float, default=demos.MOON_MASS, help="kg")
    cmds["moon"].add_argument("--proton-mass", type=float, default=demos.PROTON_MASS, help="kg")
    cmds["moon"].add_argument("--nucleons", type=float, default=demos.NUCLEONS_PER_ATOM,
                              help="average nucleons per atom")
    cmds["weak-law"].add_argument("--p", type=float, nargs="+", default=[0.2, 0.5, 0.9])
    cmds["weak-law"].add_argument("--max-copies", type=int, default=6)
    cmds["complementarity"].add_argument("--range", type=float, default=None)
    cmds["complementarity"].add_argument("--steps", type=int, default=61)
    cmds["axioms"].add_argument("--kind", choices=("matrix", "diagonal"), default="matrix")
    cmds["axioms"].add_argument("--dim", type=int, default=4)
    cmds["axioms"].add_argument("--samples", type=int, default=200)
    cmds["probability"].add_argument("--dim", type=int, default=4)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        report = handler(args)
    except (InputError, ParseError) as exc:
        print(f"qframe {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QFrameError, ValueError, ArithmeticError) as exc:
        print(f"qframe {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report, args.json)
    if not report.get("passed", True):
        failed = report.get("first_failure") or [k for k, ok in report.get("checks", {}).items() if not ok]
        failed = failed or [k for k, fig in report.get("figures", {}).items() if not fig["ok"]]
        print(f"qframe {args.command}: check failed: {failed}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
