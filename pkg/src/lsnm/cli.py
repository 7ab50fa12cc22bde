"""Command-line front end.

Subcommands: simulate, fit, infer, benchmark, estimator-bench. Exit codes:
0 on success / a decision, 2 when a pair is undecided, 1 on any error.
All commands honor --seed; --workers 1 gives deterministic output bytes.
"""

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from .benchlab import (
    DecisionRateCurve,
    audrc,
    ingest_pairs,
    run_benchmark,
    run_estimator_benchmark,
    write_curve_csv,
    write_report,
)
from .concave import ConcaveFitConfig
from .core import SamplePair
from .generators import FAMILIES, generate_corpus
from .ifgls import IFGLSConfig
from .inference import (
    ESTIMATORS,
    METHODS,
    InferenceConfig,
    analyze_pair,
    loci_h,
    loci_m,
)
from .mlp import MLPConfig


def _add_estimator_flags(p: argparse.ArgumentParser):
    # validated manually so unknown tags exit 1 with the valid list
    p.add_argument("--estimator", default="mlp")
    p.add_argument("--knots", type=int, default=25)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--outer-iters", type=int, default=100)
    p.add_argument("--loglik-tol", type=float, default=1e-6)
    p.add_argument("--mlp-width", type=int, default=100)
    p.add_argument("--mlp-steps", type=int, default=5000)
    p.add_argument("--lr-init", type=float, default=1e-2)
    p.add_argument("--lr-final", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)


def _add_method_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", default="loci_m", choices=METHODS)
    p.add_argument("--hsic-method", choices=("gamma", "permutation"), default=None)
    p.add_argument("--hsic-perms", type=int, default=None)
    p.add_argument("--sample-split", action="store_true")


def _build_config(args) -> InferenceConfig:
    estimator = getattr(args, "estimator", "mlp")
    if estimator not in ESTIMATORS:
        raise ValueError(
            f"unknown estimator {estimator!r}; valid estimators: "
            + ", ".join(ESTIMATORS)
        )
    method = getattr(args, "method", "loci_m")
    hsic_flags = (
        getattr(args, "hsic_method", None) is not None
        or getattr(args, "hsic_perms", None) is not None
        or getattr(args, "sample_split", False)
    )
    if method != "loci_h" and hsic_flags:
        raise SystemExit("error: HSIC options require --method loci_h")
    return InferenceConfig(
        spline_order=args.order,
        n_knots=args.knots,
        concave=ConcaveFitConfig(
            delta=args.delta,
            max_outer_iters=args.outer_iters,
            loglik_tol=args.loglik_tol,
        ),
        mlp=MLPConfig(
            hidden_width=args.mlp_width,
            steps=args.mlp_steps,
            lr_init=args.lr_init,
            lr_final=args.lr_final,
            seed=args.seed,
        ),
        ifgls=IFGLSConfig(),
        hsic_method=getattr(args, "hsic_method", None) or "gamma",
        hsic_perms=getattr(args, "hsic_perms", None) or 500,
        sample_split=getattr(args, "sample_split", False),
        seed=args.seed,
    )


def _load_pair(path: str) -> SamplePair:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    rows = []
    with open(p) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.replace(",", " ").split()
            if len(fields) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected exactly 2 numeric columns, "
                    f"got {len(fields)}"
                )
            try:
                rows.append((float(fields[0]), float(fields[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(rows)
    return SamplePair(arr[:, 0], arr[:, 1])


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pairs = generate_corpus(args.family, args.n_pairs, args.n_points, args.seed)
    truth_lines = ["pair_id,direction,weight"]
    for lp in pairs:
        np.savetxt(out / f"{lp.pair_id}.csv",
                   np.column_stack([lp.pair.x, lp.pair.y]), delimiter=",")
        truth_lines.append(f"{lp.pair_id},{lp.true_direction},{lp.weight}")
    (out / "ground_truth.csv").write_text("\n".join(truth_lines) + "\n")
    print(f"wrote {len(pairs)} pairs to {out}")
    return 0


def cmd_fit(args) -> int:
    pair = _load_pair(args.input)
    cfg = _build_config(args)
    analysis = analyze_pair(pair, args.estimator, cfg)
    if analysis.error:
        print(f"fit failed: {analysis.error}", file=sys.stderr)
        return 1
    T = len(analysis.pair_std)
    summary = {
        "estimator": args.estimator,
        "n_points": T,
        "loglik_per_point_xy": analysis.fit_xy.loglik.total / T,
        "loglik_per_point_yx": analysis.fit_yx.loglik.total / T,
        "converged_xy": analysis.fit_xy.converged,
        "converged_yx": analysis.fit_yx.converged,
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_infer(args) -> int:
    pair = _load_pair(args.input)
    cfg = _build_config(args)
    if args.method == "loci_m":
        verdict = loci_m(pair, args.estimator, cfg)
    else:
        verdict = loci_h(pair, args.estimator, cfg)
    record = dataclasses.asdict(verdict)
    print(json.dumps(record, indent=2))
    if args.report:
        Path(args.report).write_text(json.dumps(record, indent=2))
    return 0 if verdict.direction != "undecided" else 2


def cmd_benchmark(args) -> int:
    data = args.data or os.environ.get("LSNM_DATA_DIR")
    if not data:
        print("error: --data or LSNM_DATA_DIR required", file=sys.stderr)
        return 1
    corpus = ingest_pairs(data, args.format)
    cfg = _build_config(args)
    report = run_benchmark(corpus, args.method, args.estimator, cfg,
                           workers=args.workers, weighted=args.weighted)
    if args.report:
        write_report(report, args.report)
    if args.curve_csv:
        entries = [
            (r["pair_id"], r["certainty"], r["correct"]) for r in report["pairs"]
        ]
        entries.sort(key=lambda it: (-it[1], it[0]))
        curve = DecisionRateCurve(
            entries=entries,
            audrc=report["metrics"]["audrc"],
            accuracy=report["metrics"]["accuracy"],
        )
        write_curve_csv(curve, args.curve_csv)
    print(json.dumps(report["metrics"], indent=2))
    return 0


def cmd_estimator_bench(args) -> int:
    report = run_estimator_benchmark(
        t_values=args.t_values,
        knot_rules=args.knot_rules,
        n_seeds=args.n_seeds,
        seed=args.seed,
        n_grid=args.n_grid,
        kl_direction=args.kl_direction,
    )
    if args.report:
        write_report(report, args.report)
    print(json.dumps(report["cells"], indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsnm",
        description="Location-scale noise model fitting and cause-effect inference",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic pair corpus")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n-pairs", type=int, default=100)
    p.add_argument("--n-points", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit both directions on one pair file")
    p.add_argument("--input", required=True)
    _add_estimator_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("infer", help="decide the causal direction of one pair")
    p.add_argument("--input", required=True)
    p.add_argument("--report", default=None)
    _add_estimator_flags(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("benchmark", help="run a decision rule over a corpus")
    p.add_argument("--data", default=None)
    p.add_argument("--format", default="two_column_csv_dir",
                   choices=("two_column_csv_dir", "tuebingen_meta"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--report", default=None)
    p.add_argument("--curve-csv", default=None)
    _add_estimator_flags(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("estimator-bench",
                       help="concave vs IFGLS KL comparison on sinusoidal data")
    p.add_argument("--t-values", type=int, nargs="+", default=[100, 1000])
    p.add_argument("--knot-rules", nargs="+", default=["sqrt", "t_over_10"],
                   choices=["sqrt", "t_over_10"])
    p.add_argument("--n-seeds", type=int, default=20)
    p.add_argument("--n-grid", type=int, default=10_000)
    p.add_argument("--kl-direction", default="p_to_q",
                   choices=("p_to_q", "q_to_p"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_estimator_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
