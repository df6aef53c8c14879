"""File-driven front end: parse Hamiltonian specs, run modes, emit reports.

A Hamiltonian spec is a JSON object

    {
      "statistics": "bose" | "fermi",
      "modes": <int>,
      "terms": [
        {"creation": [1, 1], "annihilation": [], "coeff": [0.3, 0.0]},
        ...
      ],
      "hermitian_complete": false,
      "options": {"cutoff": 10}
    }

with 1-based mode indices.  ``hermitian_complete`` (or the CLI flag) adds the
adjoint of every term whose mirror is missing; the parsed polynomial must be
Hermitian afterwards or the spec is rejected.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from typing import Any

import numpy as np

from . import fock
from .bogoliubov import BogoliubovMap
from .errors import (
    DimensionCapError,
    HermiticityError,
    QuasivacError,
    SpecFormatError,
)
from .variational import (
    CertificationReport,
    MinimizeOptions,
    MinimizationResult,
    Mode,
    RunStatus,
    certify,
    minimize,
    oracle_basis,
    residual_blocks,
)
from .wick import Statistics, WickPolynomial, canonicalize_term

REPORT_SCHEMA = "quasivac-report/1"
HERMITIAN_TOL = 1e-10


def _fail(path: str, message: str) -> SpecFormatError:
    return SpecFormatError(f"{path}: {message}")


def load_spec(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise _fail(path, "file not found")
    except json.JSONDecodeError as exc:
        raise _fail(path, f"invalid JSON at line {exc.lineno}, column {exc.colno}")
    if not isinstance(data, dict):
        raise _fail(path, "top level must be an object")
    for key in ("statistics", "modes", "terms"):
        if key not in data:
            raise _fail(path, f"missing required field '{key}'")
    return data


def parse_hamiltonian(path: str, hermitian_complete: bool | None = None) -> WickPolynomial:
    """Parse a spec file into a canonical polynomial.

    ``hermitian_complete=None`` defers to the file's own flag; True forces
    completion.  Raises SpecFormatError with term/field diagnostics, and
    HermiticityError when the (possibly completed) polynomial is not
    Hermitian.
    """
    data = load_spec(path)
    stats_name = data["statistics"]
    if stats_name not in ("bose", "fermi"):
        raise _fail(path, f"statistics must be 'bose' or 'fermi', got {stats_name!r}")
    stats = Statistics(stats_name)
    n_modes = data["modes"]
    if not isinstance(n_modes, int) or n_modes < 1:
        raise _fail(path, "modes must be a positive integer")
    if not isinstance(data["terms"], list):
        raise _fail(path, "terms must be a list")

    poly = WickPolynomial.empty(n_modes, stats)
    for pos, term in enumerate(data["terms"]):
        where = f"terms[{pos}]"
        if not isinstance(term, dict):
            raise _fail(path, f"{where} must be an object")
        for key in ("creation", "annihilation", "coeff"):
            if key not in term:
                raise _fail(path, f"{where} is missing '{key}'")
        creation = term["creation"]
        annihilation = term["annihilation"]
        coeff = term["coeff"]
        for name, lst in (("creation", creation), ("annihilation", annihilation)):
            if not isinstance(lst, list) or not all(isinstance(i, int) for i in lst):
                raise _fail(path, f"{where}.{name} must be a list of integers")
            for i in lst:
                if i < 1 or i > n_modes:
                    raise _fail(path, f"{where}.{name}: index {i} outside 1..{n_modes}")
            if stats is Statistics.FERMI and len(set(lst)) != len(lst):
                raise _fail(path, f"{where}.{name}: repeated fermionic index")
        if (
            not isinstance(coeff, list)
            or len(coeff) != 2
            or not all(isinstance(x, (int, float)) for x in coeff)
        ):
            raise _fail(path, f"{where}.coeff must be [re, im]")
        poly = poly.add_term(creation, annihilation, complex(coeff[0], coeff[1]))

    complete = data.get("hermitian_complete", False) if hermitian_complete is None else hermitian_complete
    if complete:
        poly = _hermitian_completion(poly)
    if not poly.is_hermitian(HERMITIAN_TOL):
        hint = "" if complete else " (hermitian_complete not requested)"
        raise HermiticityError(f"{path}: polynomial is not Hermitian{hint}")
    return poly


def _hermitian_completion(poly: WickPolynomial) -> WickPolynomial:
    """Add the adjoint of every term whose mirror key is absent."""
    additions: dict = {}
    for (cr, an), coeff in poly.terms.items():
        mirror_key, mirror_coeff = canonicalize_term(
            poly.stats, tuple(reversed(an)), tuple(reversed(cr)), np.conj(coeff)
        )
        if mirror_key not in poly.terms and mirror_coeff != 0:
            additions[mirror_key] = additions.get(mirror_key, 0j) + mirror_coeff
    out = poly
    for (cr, an), coeff in additions.items():
        out = out.add_term(cr, an, coeff)
    return out


def serialize_hamiltonian(poly: WickPolynomial) -> dict:
    return {
        "statistics": poly.stats.value,
        "modes": poly.n_modes,
        "terms": [
            {
                "creation": list(cr),
                "annihilation": list(an),
                "coeff": [c.real, c.imag],
            }
            for (cr, an), c in poly.items()
        ],
    }


def hamiltonian_from_payload(payload: dict) -> WickPolynomial:
    stats = Statistics(payload["statistics"])
    return WickPolynomial.from_terms(
        payload["modes"],
        stats,
        [
            (t["creation"], t["annihilation"], complex(t["coeff"][0], t["coeff"][1]))
            for t in payload["terms"]
        ],
    )


def _complex_matrix(a: np.ndarray) -> list:
    return [[[x.real, x.imag] for x in row] for row in np.asarray(a, complex)]


def _matrix_from_payload(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def serialize_map(m: BogoliubovMap) -> dict:
    return {
        "u": _complex_matrix(m.u),
        "v": _complex_matrix(m.v),
        "shift": [[x.real, x.imag] for x in m.shift],
        "odd": m.odd,
        "statistics": m.stats.value,
    }


def map_from_payload(payload: dict) -> BogoliubovMap:
    return BogoliubovMap(
        Statistics(payload["statistics"]),
        _matrix_from_payload(payload["u"]),
        _matrix_from_payload(payload["v"]),
        np.array([complex(re, im) for re, im in payload["shift"]], dtype=complex),
        odd=payload["odd"],
    )


def _certification_payload(cert: CertificationReport | None) -> dict | None:
    if cert is None:
        return None
    return {
        "fd_check": {
            "deviations": list(cert.fd_deviations),
            "tolerances": list(cert.fd_tolerances),
            "passed": cert.fd_passed,
        },
        "quadratic_check": (
            None
            if cert.quadratic_rel_errors is None
            else {
                "relative_errors": list(cert.quadratic_rel_errors),
                "passed": cert.quadratic_passed,
            }
        ),
        "gauge_check": {
            "deltas": {k: list(v) for k, v in cert.gauge_deltas.items()},
            "passed": cert.gauge_passed,
        },
        "passed": cert.passed,
    }


def _oracle_payload(
    poly: WickPolynomial,
    result: MinimizationResult,
    cutoff: int,
    dimension_cap: int,
) -> dict:
    payload: dict[str, Any] = {
        "expectation": None,
        "ground_energy": None,
        "gap": None,
        "cutoff": None,
        "state_cutoff": None,
        "tail_defect": None,
        "skipped_reason": None,
    }
    try:
        ground_basis = fock.FockBasis.build(poly.stats, poly.n_modes, cutoff, dimension_cap)
        # the state may need a larger truncation than the eigensolve to keep
        # the pair-amplitude series tail below tolerance
        state_basis = oracle_basis(result.map, poly, dimension_cap=dimension_cap)
    except DimensionCapError as exc:
        payload["skipped_reason"] = str(exc)
        return payload
    payload["cutoff"] = 1 if poly.stats is Statistics.FERMI else cutoff
    payload["state_cutoff"] = state_basis.cutoffs[0]
    try:
        vec = fock.state_of_map(result.map, state_basis)
    except QuasivacError as exc:
        payload["skipped_reason"] = str(exc)
        return payload
    payload["expectation"] = float(
        fock.expectation(vec, fock.quantize(poly, state_basis)).real
    )
    payload["tail_defect"] = vec.norm_defect
    payload["ground_energy"] = float(
        np.linalg.eigvalsh(fock.quantize(poly, ground_basis))[0]
    )
    payload["gap"] = result.energy - payload["ground_energy"]
    return payload


def run(
    spec_path: str,
    mode: Mode,
    seed: int = 42,
    tol: float = 1e-8,
    cutoff: int = fock.DEFAULT_CUTOFF,
    report_path: str | None = None,
    hermitian_complete: bool | None = None,
    fd_step: float = 1e-3,
    max_iterations: int = 5000,
    multistarts: int | None = None,
    dimension_cap: int = fock.DEFAULT_DIMENSION_CAP,
) -> dict:
    """Minimize the specced Hamiltonian and assemble the JSON report."""
    report: dict[str, Any] = {
        "schema": REPORT_SCHEMA,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "mode": mode.value,
        "seed": seed,
        "tolerances": {"tol_grad": tol},
        "spec_path": spec_path,
        "status": None,
        "error": None,
    }
    try:
        poly = parse_hamiltonian(spec_path, hermitian_complete)
        report["hamiltonian"] = serialize_hamiltonian(poly)
        opts = MinimizeOptions(
            tol_grad=tol, seed=seed, max_iterations=max_iterations, multistarts=multistarts
        )
        result = minimize(poly, mode, opts)
        report["status"] = result.status.value
        report["energy"] = result.energy
        report["D"] = _complex_matrix(result.blocks.single_particle)
        report["D_spectrum"] = [float(x) for x in result.spectrum]
        report["residual_K"] = result.blocks.linear_norm
        report["residual_O"] = result.blocks.pairing_norm
        report["iterations"] = result.iterations
        report["n_starts"] = result.n_starts
        report["trace_summary"] = {
            "first_energy": result.trace[0][0],
            "final_energy": result.trace[-1][0],
            "final_residual": result.trace[-1][1],
            "evaluations": len(result.trace),
        }
        report["map"] = serialize_map(result.map)
        if result.status is RunStatus.CONVERGED:
            cert = certify(
                result,
                poly,
                mode,
                fd_step=fd_step,
                seed=seed,
                dimension_cap=dimension_cap,
            )
            report["certification"] = _certification_payload(cert)
            report["oracle"] = _oracle_payload(poly, result, cutoff, dimension_cap)
        else:
            report["certification"] = None
            report["oracle"] = None
    except QuasivacError as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def verify_report(report_path: str, tol: float = 1e-6) -> dict:
    """Recompute the oracle numbers of a stored report and compare."""
    with open(report_path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    if report.get("status") != "converged":
        return {"passed": False, "reason": f"report status is {report.get('status')!r}"}
    poly = hamiltonian_from_payload(report["hamiltonian"])
    m = map_from_payload(report["map"])
    oracle = report.get("oracle") or {}
    cutoff = oracle.get("cutoff") or fock.DEFAULT_CUTOFF
    ground_basis = fock.FockBasis.build(poly.stats, poly.n_modes, cutoff)
    state_basis = oracle_basis(m, poly)
    vec = fock.state_of_map(m, state_basis)
    expectation = float(fock.expectation(vec, fock.quantize(poly, state_basis)).real)
    ground = float(np.linalg.eigvalsh(fock.quantize(poly, ground_basis))[0])
    difference = abs(expectation - report["energy"])
    out = {
        "engine_energy": report["energy"],
        "oracle_expectation": expectation,
        "difference": difference,
        "ground_energy": ground,
        "gap": report["energy"] - ground,
        "tolerance": tol,
        "passed": bool(difference < tol),
    }
    return out


def certify_report(report_path: str, fd_step: float = 1e-3, seed: int = 1234) -> dict:
    """Re-run the certification battery for a stored converged report."""
    with open(report_path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    if report.get("status") != "converged":
        return {"passed": False, "reason": f"report status is {report.get('status')!r}"}
    poly = hamiltonian_from_payload(report["hamiltonian"])
    m = map_from_payload(report["map"])
    mode = Mode(report["mode"])
    blocks = residual_blocks(poly, m)
    spectrum = np.linalg.eigvalsh(
        (blocks.single_particle + blocks.single_particle.conj().T) / 2
    )
    result = MinimizationResult(
        map=m,
        blocks=blocks,
        energy=float(blocks.constant.real),
        spectrum=spectrum,
        residual=blocks.residual,
        iterations=report.get("iterations", 0),
        status=RunStatus.CONVERGED,
        trace=((float(blocks.constant.real), blocks.residual),),
    )
    cert = certify(result, poly, mode, fd_step=fd_step, seed=seed)
    payload = _certification_payload(cert)
    payload["fd_step"] = fd_step
    return payload


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasivac",
        description="Minimize ladder-operator Hamiltonians over pure Gaussian states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_min = sub.add_parser("minimize", help="run a minimization and write a report")
    p_min.add_argument("spec", help="path to a Hamiltonian spec JSON file")
    p_min.add_argument(
        "--mode",
        required=True,
        choices=[m.value for m in Mode],
    )
    p_min.add_argument("--tol", type=float, default=1e-8)
    p_min.add_argument("--cutoff", type=int, default=fock.DEFAULT_CUTOFF)
    p_min.add_argument("--seed", type=int, default=42)
    p_min.add_argument("--report", default=None, help="write the JSON report here")
    p_min.add_argument("--hermitian-complete", action="store_true", default=None)
    p_min.add_argument("--fd-step", type=float, default=1e-3)
    p_min.add_argument("--max-iterations", type=int, default=5000)
    p_min.add_argument("--multistarts", type=int, default=None)
    p_min.add_argument("--dimension-cap", type=int, default=fock.DEFAULT_DIMENSION_CAP)

    p_ver = sub.add_parser("verify", help="re-run the oracle checks of a report")
    p_ver.add_argument("report")
    p_ver.add_argument("--tol", type=float, default=1e-6)

    p_cert = sub.add_parser("certify", help="re-run the certification battery")
    p_cert.add_argument("report")
    p_cert.add_argument("--fd-step", type=float, default=1e-3)
    p_cert.add_argument("--seed", type=int, default=1234)

    args = parser.parse_args(argv)
    if args.command == "minimize":
        report = run(
            args.spec,
            Mode(args.mode),
            seed=args.seed,
            tol=args.tol,
            cutoff=args.cutoff,
            report_path=args.report,
            hermitian_complete=args.hermitian_complete,
            fd_step=args.fd_step,
            max_iterations=args.max_iterations,
            multistarts=args.multistarts,
            dimension_cap=args.dimension_cap,
        )
        if not args.report:
            json.dump(report, sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
        else:
            print(f"report written to {args.report} (status: {report['status']})")
        return 0 if report["status"] != "error" else 1
    if args.command == "verify":
        out = verify_report(args.report, tol=args.tol)
        json.dump(out, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0 if out.get("passed") else 1
    out = certify_report(args.report, fd_step=args.fd_step, seed=args.seed)
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0 if out.get("passed") else 1


if __name__ == "__main__":
    raise SystemExit(main())
