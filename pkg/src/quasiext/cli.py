"""Command-line front end.

Every subcommand reads a JSON operator spec (``--spec``), writes a
deterministic JSON report (``--out``, default stdout) and exits with

* 0 on success,
* 1 on I/O failure,
* 2 on a validation error (an error JSON naming the invariant is printed),
* 3 when a computation exceeds the oracle size limits,
* 4 when ``demo`` has a failing item.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import alambda, extended_spectrum as es, sylvester_oracle as so
from .eigvec_construct import (diag_construction, shifted_construction, spectral_window_witness,
                               verify_intertwining)
from .errors import QuasiextError, TooLarge, Unclassifiable, ValidationError
from .lift import (build_extension, classify_lift_case, lift_conditions_lambda)
from .operator_model import (DirectSum, Normal, PositiveMap, Pure, ShiftKind, build_tensor_shift,
                             modulus_map, operator_of, parse_matrix, parse_spec, spec_to_json)

COMMANDS = ("extspec", "alambda", "eigvec", "oracle-scan", "lift", "demo")
EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_SIZE, EXIT_DEMO = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec_path: Optional[Path] = None
    out_path: Optional[Path] = None
    lam: Optional[complex] = None
    radii: Optional[int] = None
    angles: Optional[int] = None
    tol: float = 1e-9
    seed: int = 0
    seed_matrix: Optional[Path] = None
    shift: int = 0
    r: Optional[float] = None
    r_max: float = 3.0
    half_width: int = 4
    csv_path: Optional[Path] = None
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError("command", f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ValidationError("tol_positive", "--tol must be positive")
        if self.radii is not None and not 1 <= self.radii <= so.MAX_RADII:
            raise TooLarge(f"--radii must be in 1..{so.MAX_RADII}")
        if self.angles is not None and not 1 <= self.angles <= so.MAX_ANGLES:
            raise TooLarge(f"--angles must be in 1..{so.MAX_ANGLES}")


def _parse_lambda(text: str) -> complex:
    parts = text.split(",")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}") from None
    if len(vals) == 1:
        return complex(vals[0])
    if len(vals) == 2:
        return complex(vals[0], vals[1])
    raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quasiext",
                                description="Extended eigenvalues of quasinormal operator models.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", type=Path, help="JSON operator spec")
    p.add_argument("--out", type=Path, help="report path (default: stdout)")
    p.add_argument("--lambda", dest="lam", type=_parse_lambda, help="complex lambda as 're,im'")
    p.add_argument("--radii", type=int, help="number of radii in the polar grid")
    p.add_argument("--angles", type=int, help="number of angles in the polar grid")
    p.add_argument("--r-max", type=float, default=3.0, help="largest grid radius (default 3)")
    p.add_argument("--tol", type=float, default=1e-9, help="relative rank tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--seed-matrix", type=Path, help="JSON file holding the seed matrix L")
    p.add_argument("--shift", type=int, default=0, help="band shift m for eigvec/lift")
    p.add_argument("--r", type=float, help="growth parameter for alambda (default |lambda|)")
    p.add_argument("--half-width", type=int, default=4, help="bilateral half width for lift")
    p.add_argument("--csv", dest="csv_path", type=Path, help="also write the polar grid as CSV")
    p.add_argument("--workers", type=int, default=1, help="threads for oracle-scan")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(command=ns.command, spec_path=ns.spec, out_path=ns.out, lam=ns.lam,
                     radii=ns.radii, angles=ns.angles, tol=ns.tol, seed=ns.seed,
                     seed_matrix=ns.seed_matrix, shift=ns.shift, r=ns.r, r_max=ns.r_max,
                     half_width=ns.half_width, csv_path=ns.csv_path, workers=ns.workers)


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _load_json(path: Path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("json", f"{path}: {exc}") from exc


def _need(cfg: RunConfig, field: str, flag: str):
    value = getattr(cfg, field)
    if value is None:
        raise ValidationError(f"missing_{field}", f"{cfg.command} needs {flag}")
    return value


def _load_spec(cfg: RunConfig):
    return parse_spec(_load_json(_need(cfg, "spec_path", "--spec")))


def _seed(cfg: RunConfig) -> np.ndarray:
    return parse_matrix(_load_json(_need(cfg, "seed_matrix", "--seed-matrix")), "seed matrix")


def _grid(cfg: RunConfig, default_radii: int, default_angles: int):
    n_r = cfg.radii or default_radii
    n_t = cfg.angles or default_angles
    radii = [cfg.r_max * (k + 1) / n_r for k in range(n_r)]
    angles = [2 * np.pi * k / n_t for k in range(n_t)]
    return radii, angles


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def _pure_of(spec, what: str) -> Pure:
    if isinstance(spec, Pure) and spec.shift.kind == "unilateral":
        return spec
    raise ValidationError("unilateral_pure", f"{what} needs a pure spec with a unilateral shift")


# ---------------------------------------------------------------------------
# subcommands

def cmd_extspec(cfg: RunConfig) -> dict:
    spec, profile = _load_spec(cfg)
    region = es.extended_spectrum(spec, profile)
    report = {"spec": spec_to_json(spec), "region": region.to_json()}
    if cfg.lam is not None:
        report["contains_lambda"] = es.contains(region, cfg.lam)
    if cfg.csv_path:
        radii, angles = _grid(cfg, 12, 8)
        _write_csv(cfg.csv_path, ("radius", "angle", "member"), es.polar_grid(region, radii, angles))
    return report


def _alambda_pair(spec):
    if isinstance(spec, Pure):
        return spec.A, spec.A
    if isinstance(spec, DirectSum):
        return modulus_map(spec.normal), spec.pure.A
    raise ValidationError("pure_or_direct_sum", "alambda needs a pure or direct_sum spec")


def cmd_alambda(cfg: RunConfig) -> dict:
    spec, _ = _load_spec(cfg)
    left, right = _alambda_pair(spec)
    r = cfg.r if cfg.r is not None else abs(_need(cfg, "lam", "--lambda or --r"))
    pattern = alambda.pattern_for(left, right, r)
    report = {"r": r, "mask": pattern.grid().splitlines(), "nontrivial": not pattern.empty}
    try:
        report["standard_mask"] = pattern.grid(standard=True).splitlines()
    except ValueError:
        pass
    if cfg.seed_matrix is not None:
        report["certificate"] = alambda.membership(_seed(cfg), left, right, r).to_json()
    return report


def _construction(cfg: RunConfig, pure: Pure):
    lam = _need(cfg, "lam", "--lambda")
    base = diag_construction(pure.A, _seed(cfg), lam, pure.shift.n)
    return lam, shifted_construction(cfg.shift, base)


def cmd_eigvec(cfg: RunConfig) -> dict:
    spec, _ = _load_spec(cfg)
    pure = _pure_of(spec, "eigvec")
    lam, X = _construction(cfg, pure)
    T = operator_of(pure)
    res = verify_intertwining(T, X.base, T, lam)
    null = so.filtered_nullspace(T, lam, cfg.tol)
    return {"intertwiner": X.to_json(), "interior_residual": res.interior,
            "boundary_residual": res.boundary,
            "oracle_dimension": null.dimension,
            "projection_deficiency": null.projection_deficiency(X.base)}


def cmd_oracle_scan(cfg: RunConfig) -> dict:
    spec, _ = _load_spec(cfg)
    if isinstance(spec, Normal):
        raise ValidationError("unilateral_pure", "oracle-scan needs a pure or direct_sum spec")
    radii, angles = _grid(cfg, 8, 8)
    points = so.scan_region(operator_of(spec), radii, angles, cfg.tol, workers=cfg.workers)
    rows = [(p.radius, p.angle, p.dimension, int(p.member)) for p in points]
    if cfg.csv_path:
        _write_csv(cfg.csv_path, ("radius", "angle", "dimension", "member"), rows)
    return {"points": [dict(zip(("radius", "angle", "dimension", "member"), r)) for r in rows]}


def cmd_lift(cfg: RunConfig) -> dict:
    spec, _ = _load_spec(cfg)
    pure = _pure_of(spec, "lift")
    L = _seed(cfg)
    lam, X = _construction(cfg, pure)
    report = lift_conditions_lambda(X, pure.A, lam)
    try:
        case = classify_lift_case(lam, pure.A, L, list(X.bands))
    except Unclassifiable:
        case = "not_applicable"
    out = {"report": {**report.to_json(), "case": case}}
    if report.liftable:
        ext = build_extension(X, pure.A, lam, cfg.half_width)
        U = build_tensor_shift(pure.A, ShiftKind.bilateral(cfg.half_width))
        out["extension_interior_residual"] = verify_intertwining(U, ext, U, lam).interior
    return out


# ---------------------------------------------------------------------------
# demo: worked examples as a regression suite

def _E(n, i, j):
    m = np.zeros((n, n))
    m[i - 1, j - 1] = 1.0
    return m


def _demo_items():
    A2 = PositiveMap.diag([2.0, 1.0])

    def four_regimes():
        expect = {3.0: [[1, 1], [1, 1]], 2.0: [[1, 1], [1, 1]], 1.5: [[1, 0], [1, 1]],
                  1.0: [[1, 0], [1, 1]], 0.7: [[0, 0], [1, 0]], 0.5: [[0, 0], [1, 0]],
                  0.4: [[0, 0], [0, 0]]}
        return all(np.array_equal(alambda.pattern_for(A2, A2, r).standard_mask(), np.array(m, bool))
                   for r, m in expect.items())

    def non_algebra():
        A3 = PositiveMap.diag([4.0, 2.0, 1.0])
        m12 = alambda.membership(_E(3, 1, 2), A3, A3, 2.0)
        m23 = alambda.membership(_E(3, 2, 3), A3, A3, 2.0)
        m13 = alambda.membership(_E(3, 1, 3), A3, A3, 2.0)
        return m12.member and m23.member and not m13.member and m13.worst_entry[2] == 2.0

    def pure_region():
        reg = es.pure_extended_spectrum(A2).to_json()["components"]
        return reg == [{"kind": "disk_complement", "radius": 0.5, "boundary": True}]

    def quasinormal_region():
        reg = es.quasinormal_extended_spectrum(DirectSum(Normal((3,)), Pure(A2, ShiftKind.unilateral(8))))
        return (1 in reg and 0.5 in reg and 0.5j in reg and 0.49 not in reg and 2.0 in reg)

    def bilateral_region():
        reg = es.bilateral_extended_spectrum(A2)
        return all(z in reg for z in (0.5, 1, 2)) and all(z not in reg for z in (0.4, 2.5))

    def diag_blocks():
        X = diag_construction(A2, _E(2, 2, 1), 1, 4)
        return all(np.allclose(X.bands[0][n], 2.0 ** -n * _E(2, 2, 1), atol=0, rtol=1e-15)
                   for n in range(4))

    def diag_reject():
        try:
            diag_construction(A2, _E(2, 2, 1), 0.4, 4)
        except QuasiextError:
            return True
        return False

    def window_witness():
        L = spectral_window_witness(A2, A2, 0.1)
        return np.allclose(np.abs(L), _E(2, 2, 1)) and alambda.membership(L, A2, A2, 1.1 / 1.9).member

    def oracle_boundary():
        T = build_tensor_shift(A2, ShiftKind.unilateral(6))
        return (so.filtered_nullspace(T, 0.45).dimension == 0
                and so.filtered_nullspace(T, 0.5).dimension > 0)

    def lift_cases():
        return (classify_lift_case(2, A2, _E(2, 1, 2), [0]) == 1
                and classify_lift_case(1.5, A2, _E(2, 2, 1), [0]) == 2
                and classify_lift_case(3, A2, _E(2, 2, 1), [0]) == 4
                and classify_lift_case(1, A2, np.eye(2), [-1]) == 3)

    def lift_equivalence():
        ok = lift_conditions_lambda(diag_construction(A2, _E(2, 1, 2), 2, 8), A2, 2).liftable
        bad = lift_conditions_lambda(diag_construction(A2, _E(2, 1, 2), 3, 8), A2, 3).liftable
        return ok and not bad

    def extension():
        X = diag_construction(A2, _E(2, 1, 2), 2, 8)
        ext = build_extension(X, A2, 2, 3)
        U = build_tensor_shift(A2, ShiftKind.bilateral(3))
        return (verify_intertwining(U, ext, U, 2).interior <= 1e-10
                and all(np.allclose(ext.block(i, i), _E(2, 1, 2)) for i in range(-3, 4)))

    return [
        ("alambda.pattern_for#1", "four-regime masks of diag(2,1)", four_regimes),
        ("alambda.algebra_closure_check#1", "E12, E23 in A_2(diag(4,2,1)), E13 not", non_algebra),
        ("extended_spectrum.pure_extended_spectrum#1", "diag(2,1) (x) S: |z| >= 0.5", pure_region),
        ("extended_spectrum.quasinormal_extended_spectrum#1", "diag(3) (+) diag(2,1) (x) S",
         quasinormal_region),
        ("extended_spectrum.bilateral_extended_spectrum#1", "diag(2,1) (x) U: 0.5 <= |z| <= 2",
         bilateral_region),
        ("eigvec_construct.diag_construction#1", "blocks 2^-n E21 at lambda = 1", diag_blocks),
        ("eigvec_construct.diag_construction#3", "E21 rejected at lambda = 0.4", diag_reject),
        ("eigvec_construct.spectral_window_witness#1", "rank-one witness e2 e1*", window_witness),
        ("sylvester_oracle.filtered_nullspace#1", "oracle boundary at radius 0.5", oracle_boundary),
        ("lift.classify_lift_case#1-3", "lift cases 1, 2, 3, 4", lift_cases),
        ("lift.lift_conditions_lambda#1-2", "E12 lifts at 2, not at 3", lift_equivalence),
        ("lift.build_extension#1", "bilateral E12 extension at lambda = 2", extension),
    ]


def generator_count_experiment(A: PositiveMap, lams, n_blocks: int, tol: float = 1e-9) -> list:
    """Filtered oracle dimension against the number of band generators.

    Generators are ``(I (x) S^m) D_{A,L,lam}`` over the mask basis and
    ``m = 0..N-1``. Recorded as data; no relation is asserted.
    """
    T = build_tensor_shift(A, ShiftKind.unilateral(n_blocks))
    rows = []
    for lam in lams:
        mask = alambda.pattern_for(A, A, abs(lam)).mask
        rows.append({"lambda": complex(lam), "generators": int(mask.sum()) * n_blocks,
                     "filtered_dimension": so.filtered_nullspace(T, lam, tol).dimension})
    return rows


def cmd_demo(cfg: RunConfig) -> dict:
    items = []
    for ident, desc, fn in _demo_items():
        try:
            passed = bool(fn())
            err = None
        except Exception as exc:  # a crashing item is a failing item
            passed, err = False, f"{type(exc).__name__}: {exc}"
        item = {"id": ident, "description": desc, "passed": passed}
        if err:
            item["error"] = err
        items.append(item)
    experiment = generator_count_experiment(PositiveMap.diag([2.0, 1.0]), [0.45, 0.5, 1.0, 2.0], 6)
    return {"items": items, "passed": all(i["passed"] for i in items),
            "generator_count_experiment": experiment}


HANDLERS = {"extspec": cmd_extspec, "alambda": cmd_alambda, "eigvec": cmd_eigvec,
            "oracle-scan": cmd_oracle_scan, "lift": cmd_lift, "demo": cmd_demo}


def _error_report(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "invariant": getattr(exc, "invariant", type(exc).__name__),
            "message": str(exc)}


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute one command; returns the exit code."""
    stdout = stdout or sys.stdout
    try:
        report = HANDLERS[cfg.command](cfg)
    except TooLarge as exc:
        stdout.write(_dumps(_error_report(exc)))
        return EXIT_SIZE
    except OSError as exc:
        stdout.write(_dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_IO
    except (QuasiextError, ValueError, TypeError) as exc:
        stdout.write(_dumps(_error_report(exc)))
        return EXIT_VALIDATION
    text = _dumps(report)
    if cfg.out_path:
        try:
            Path(cfg.out_path).write_text(text)
        except OSError as exc:
            stdout.write(_dumps({"error": type(exc).__name__, "message": str(exc)}))
            return EXIT_IO
    else:
        stdout.write(text)
    if cfg.command == "demo" and not report["passed"]:
        return EXIT_DEMO
    return EXIT_OK


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except TooLarge as exc:
        sys.stdout.write(_dumps(_error_report(exc)))
        return EXIT_SIZE
    except ValidationError as exc:
        sys.stdout.write(_dumps(_error_report(exc)))
        return EXIT_VALIDATION
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
