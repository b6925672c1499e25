"""Command-line entry point.

Subcommands: synth, dict, demix, diagnose, detect, roc-table. Every run
writes a JSON manifest recording the flags, input digests, seed, and outputs,
so any run can be reproduced byte-for-byte (modulo floating-point
reassociation in the dense algebra).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .detect import (
    best_auc_over_lambda,
    column_norm_scores,
    matched_filter,
    matched_filter_dagger,
    roc,
)
from .dictionary import Dictionary, learn_dictionary, sample_dictionary
from .errors import HsDemixError
from .hsio import (
    load_cube,
    load_mask,
    load_matrix_csv,
    normalize_joint,
    save_mask,
    save_matrix_csv,
    unfold,
)
from .solver import ApgConfig, demix, lambda_grid, rpca_dagger
from .synth import SynthSpec, generate

METHODS = ("xpra", "rpca-dagger", "mf", "mf-dagger")


def _sha256(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _write_manifest(args, inputs, outputs, started, out_prefix):
    manifest = {
        "subcommand": args.command,
        "flags": {
            k: v for k, v in sorted(vars(args).items()) if k not in ("command", "func")
        },
        "inputs": {str(p): _sha256(p) for p in inputs},
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_seconds": round(time.monotonic() - started, 3),
        "outputs": [str(p) for p in outputs],
    }
    path = Path(f"{out_prefix}.manifest.json")
    path.write_text(json.dumps(manifest, indent=1))
    return path


def _load_data(args):
    """Load the data matrix from --data (cube base path or matrix CSV)."""
    path = Path(args.data)
    if path.suffix == ".csv" and not path.with_suffix(".json").exists():
        return load_matrix_csv(path), [path]
    cube = load_cube(path, format="csv-matrix" if path.suffix == ".csv" else "raw-f32+json-header")
    base = path.with_suffix("") if path.suffix else path
    payload = base.with_suffix(".csv" if path.suffix == ".csv" else ".f32")
    return unfold(cube), [payload, base.with_suffix(".json")]


def _load_dictionary(args, Y):
    """Load the raw dictionary CSV and jointly normalize per the protocol."""
    raw = load_matrix_csv(args.dict)
    if args.no_normalize:
        return Y, Dictionary.from_matrix(raw)
    Y_scaled, raw_scaled, _ = normalize_joint(Y, raw)
    return Y_scaled, Dictionary.from_matrix(raw_scaled)


def _apg_config(args, lam):
    return ApgConfig(
        lam=lam,
        continuation_factor=args.v,
        nu_floor=args.nu_floor,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
    )


def _add_solver_flags(p):
    p.add_argument("--v", type=float, default=0.95, help="continuation factor")
    p.add_argument("--nu-floor", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--rel-tol", type=float, default=1e-6)


def cmd_synth(args):
    started = time.monotonic()
    spec = SynthSpec(
        f=args.f,
        nm=args.nm,
        r=args.r,
        d=args.d,
        s=args.s,
        dictionary_kind=args.dict_kind,
        magnitude_low=args.mag_low,
        magnitude_high=args.mag_high,
        seed=args.seed,
    )
    Y, X0, A0, R, report = generate(spec)
    prefix = args.out_prefix
    outputs = [
        save_matrix_csv(Y, f"{prefix}.Y.csv"),
        save_matrix_csv(X0, f"{prefix}.X0.csv"),
        save_matrix_csv(A0, f"{prefix}.A0.csv"),
        save_matrix_csv(R.atoms, f"{prefix}.R.csv"),
    ]
    report_path = Path(f"{prefix}.report.json")
    report_path.write_text(report.to_json(indent=1))
    outputs.append(report_path)
    outputs.append(_write_manifest(args, [], outputs, started, prefix))
    return 0


def cmd_dict(args):
    started = time.monotonic()
    Y, inputs = _load_data(args)
    if args.mode == "sample":
        mask = load_mask(args.mask, positive_class_id=args.positive_class)
        R = sample_dictionary(Y, mask, args.d, args.seed)
        inputs.append(Path(args.mask))
    else:
        if args.mask:
            mask = load_mask(args.mask, positive_class_id=args.positive_class)
            Y_pos = Y[:, mask.positive_indices]
            inputs.append(Path(args.mask))
        else:
            Y_pos = Y
        R = learn_dictionary(Y_pos, args.d, rho=args.rho, iters=args.iters, seed=args.seed)
    outputs = [save_matrix_csv(R.atoms, f"{args.out_prefix}.R.csv")]
    outputs.append(_write_manifest(args, inputs, outputs, started, args.out_prefix))
    return 0


def cmd_demix(args):
    started = time.monotonic()
    Y, inputs = _load_data(args)
    inputs.append(Path(args.dict))
    Y, R = _load_dictionary(args, Y)
    if args.lam is not None:
        lams = [args.lam]
    else:
        lams = list(lambda_grid(Y, R, args.lambda_grid))
    outputs = []
    reports = []
    for idx, lam in enumerate(lams):
        result = (rpca_dagger if args.rpca_dagger else demix)(
            Y, R, _apg_config(args, lam)
        )
        tag = "" if len(lams) == 1 else f".lam{idx:03d}"
        outputs.append(save_matrix_csv(result.X_hat, f"{args.out_prefix}{tag}.X.csv"))
        outputs.append(save_matrix_csv(result.A_hat, f"{args.out_prefix}{tag}.A.csv"))
        reports.append(
            {
                "lambda": result.lambda_used,
                "iterations": result.iterations,
                "converged": result.converged,
                "residual": result.residual,
                "final_objective": result.objective_trace[-1]
                if result.objective_trace
                else None,
            }
        )
    report_path = Path(f"{args.out_prefix}.convergence.json")
    report_path.write_text(json.dumps(reports, indent=1))
    outputs.append(report_path)
    outputs.append(_write_manifest(args, inputs, outputs, started, args.out_prefix))
    return 0


def cmd_diagnose(args):
    started = time.monotonic()
    from .guarantees import diagnose

    X0 = load_matrix_csv(args.x0)
    A0 = load_matrix_csv(args.a0)
    R = Dictionary.from_matrix(load_matrix_csv(args.dict))
    report = diagnose(X0, A0, R, rank_tol=args.rank_tol)
    out = Path(f"{args.out_prefix}.report.json")
    out.write_text(report.to_json(indent=1))
    _write_manifest(
        args, [args.x0, args.a0, args.dict], [out], started, args.out_prefix
    )
    print(report.to_json())
    return 0


def _scores_for_method(method, Y, R, mask, args):
    """Returns (ScoreVector or None, curve, result or None) for one method."""
    if method in ("mf", "mf-dagger"):
        scorer = matched_filter if method == "mf" else matched_filter_dagger
        scores = scorer(Y, R)
        curve = roc(scores, mask, sweep="fixed-grid", allow_flip=args.allow_flip)
        return scores, curve, None
    grid = lambda_grid(Y, R, args.lambda_grid)
    if method == "rpca-dagger":
        best = None
        for lam in grid:
            result = rpca_dagger(Y, R, _apg_config(args, float(lam)))
            curve = roc(
                column_norm_scores(result.A_hat), mask, allow_flip=args.allow_flip
            )
            if best is None or curve.auc > best[1].auc:
                best = (float(lam), curve, result)
        _, curve, result = best
        return column_norm_scores(result.A_hat), curve, result
    _, curve, result = best_auc_over_lambda(
        Y, R, mask, grid, cfg=_apg_config(args, float(grid[0])), allow_flip=args.allow_flip
    )
    return column_norm_scores(result.A_hat), curve, result


def cmd_detect(args):
    started = time.monotonic()
    Y, inputs = _load_data(args)
    inputs += [Path(args.dict), Path(args.mask)]
    Y, R = _load_dictionary(args, Y)
    mask = load_mask(args.mask, positive_class_id=args.positive_class)
    scores, curve, _ = _scores_for_method(args.method, Y, R, mask, args)

    outputs = []
    curve_json = Path(f"{args.out_prefix}.roc.json")
    curve_json.write_text(json.dumps(curve.to_dict(), indent=1))
    outputs.append(curve_json)
    rows = np.column_stack([curve.thresholds, curve.tpr, curve.fpr])
    csv_path = Path(f"{args.out_prefix}.roc.csv")
    np.savetxt(
        csv_path, rows, delimiter=",", header="threshold,tpr,fpr", comments=""
    )
    outputs.append(csv_path)
    if args.emit_mask:
        vals = -scores.values if curve.flipped else scores.values
        pred = (vals > curve.best_threshold).astype(int)
        outputs.append(save_mask(pred, f"{args.out_prefix}.detected.csv"))
    outputs.append(_write_manifest(args, inputs, outputs, started, args.out_prefix))
    return 0


def cmd_roc_table(args):
    started = time.monotonic()
    Y, inputs = _load_data(args)
    inputs += [Path(args.dict), Path(args.mask)]
    Y, R = _load_dictionary(args, Y)
    mask = load_mask(args.mask, positive_class_id=args.positive_class)

    lines = ["method,threshold,tpr,fpr,auc"]
    for method in METHODS:
        _, curve, _ = _scores_for_method(method, Y, R, mask, args)
        thr = "N/A" if method.startswith("mf") else f"{curve.best_threshold:.6g}"
        name = method + ("*" if curve.flipped else "")
        lines.append(
            f"{name},{thr},{curve.best_tpr:.6g},{curve.best_fpr:.6g},{curve.auc:.6g}"
        )
    out = Path(f"{args.out_prefix}.table.csv")
    out.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    _write_manifest(args, inputs, [out], started, args.out_prefix)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsdemix",
        description="Low-rank + dictionary-sparse demixing and target detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic instance")
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--nm", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dict-kind", default="gaussian-normalized")
    p.add_argument("--mag-low", type=float, default=0.5)
    p.add_argument("--mag-high", type=float, default=1.5)
    p.add_argument("--out-prefix", default="synth")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dict", help="build a dictionary by sampling or learning")
    p.add_argument("--data", required=True)
    p.add_argument("--mode", choices=("sample", "learn"), default="sample")
    p.add_argument("--mask")
    p.add_argument("--positive-class", type=int, default=16)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", default="dict")
    p.set_defaults(func=cmd_dict)

    p = sub.add_parser("demix", help="solve the demixing program")
    p.add_argument("--data", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda-grid", type=int, default=100)
    p.add_argument("--rpca-dagger", action="store_true")
    p.add_argument("--no-normalize", action="store_true")
    _add_solver_flags(p)
    p.add_argument("--out-prefix", default="demix")
    p.set_defaults(func=cmd_demix)

    p = sub.add_parser("diagnose", help="recovery-guarantee report")
    p.add_argument("--x0", required=True)
    p.add_argument("--a0", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--rank-tol", type=float, default=1e-8)
    p.add_argument("--out-prefix", default="diagnose")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("detect", help="score voxels and emit an ROC curve")
    p.add_argument("--data", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--method", choices=METHODS, default="xpra")
    p.add_argument("--positive-class", type=int, default=16)
    p.add_argument("--lambda-grid", type=int, default=100)
    p.add_argument("--allow-flip", action="store_true")
    p.add_argument("--emit-mask", action="store_true")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="reserved; sweep is sequential")
    _add_solver_flags(p)
    p.add_argument("--out-prefix", default="detect")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("roc-table", help="all four methods, one table")
    p.add_argument("--data", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--positive-class", type=int, default=16)
    p.add_argument("--lambda-grid", type=int, default=100)
    p.add_argument("--allow-flip", action="store_true")
    p.add_argument("--no-normalize", action="store_true")
    _add_solver_flags(p)
    p.add_argument("--out-prefix", default="roc_table")
    p.set_defaults(func=cmd_roc_table)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except HsDemixError as e:
        print(f"error: {e.category}: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch())
