"""Command-line interface.

Subcommands: ``analyze`` (full pipeline), ``backdoor`` (list minimal
adjustment sets for a graph), ``simulate`` (write a synthetic cohort CSV).

Exit codes: 0 success, 2 usage error, 3 data error, 4 not identifiable,
5 numerical failure.  Failures print a machine-readable error JSON object
to stdout.
"""

import argparse
import json
import sys

from .analysis import AnalysisOptions, run_analysis, write_outputs
from .cohort import save_cohort, stratum_counts
from .errors import (
    CausalSurvError,
    CohortError,
    EstimationError,
    GraphError,
    InvalidAdjustmentSet,
    InvalidConfig,
    NonMonotoneCounts,
    NotIdentifiable,
    PositivityViolation,
)
from .graph import load_graph, minimal_backdoor_sets
from .simulate import SimConfig, generate_cohort

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NOT_IDENTIFIABLE = 4
EXIT_NUMERICAL = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalsurv",
        description=(
            "Confounding-adjusted survival curves and hazard ratios from "
            "observational cohorts via backdoor adjustment on a causal graph."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the full adjustment pipeline")
    analyze.add_argument("--data", required=True, help="cohort CSV file")
    analyze.add_argument("--graph", required=True, help="causal graph JSON file")
    analyze.add_argument(
        "--treatment", required=True, help="treatment column (and graph node) name"
    )
    analyze.add_argument(
        "--time", required=True, help="survival-time column (and outcome node) name"
    )
    analyze.add_argument("--event", required=True, help="event-status column name")
    analyze.add_argument(
        "--covariates", default="", help="comma-separated covariate column names"
    )
    analyze.add_argument("--id", dest="id_col", default=None, help="id column name")
    analyze.add_argument(
        "--adjustment-set",
        default="auto",
        help="'auto' (first minimal backdoor set) or explicit comma-separated names",
    )
    analyze.add_argument("--ties", choices=("efron", "breslow"), default="efron")
    analyze.add_argument("--alpha", type=float, default=0.05)
    analyze.add_argument(
        "--t-max", type=int, default=None, help="truncate follow-up at this day"
    )
    analyze.add_argument("--strict-censoring", action="store_true")
    analyze.add_argument("--svg", action="store_true", help="also write curves.svg")
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.set_defaults(func=_cmd_analyze)

    backdoor = sub.add_parser(
        "backdoor", help="list minimal backdoor adjustment sets"
    )
    backdoor.add_argument("--graph", required=True)
    backdoor.add_argument("--treatment", required=True, help="treatment node name")
    backdoor.add_argument("--outcome", required=True, help="outcome node name")
    backdoor.set_defaults(func=_cmd_backdoor)

    simulate = sub.add_parser(
        "simulate", help="write a synthetic confounded cohort CSV"
    )
    simulate.add_argument("--n", type=int, default=200)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument(
        "--bias",
        type=float,
        default=0.75,
        help="P(treated | z=0); P(treated | z=1) is its complement",
    )
    simulate.add_argument("--out", default=None, help="output CSV (default stdout)")
    simulate.set_defaults(func=_cmd_simulate)
    return parser


def _cmd_analyze(args) -> int:
    covariates = tuple(c.strip() for c in args.covariates.split(",") if c.strip())
    options = AnalysisOptions(
        treatment_col=args.treatment,
        time_col=args.time,
        event_col=args.event,
        covariate_cols=covariates,
        id_col=args.id_col,
        adjustment=args.adjustment_set,
        ties=args.ties,
        alpha=args.alpha,
        t_max=args.t_max,
        strict_censoring=args.strict_censoring,
    )
    report, artifacts = run_analysis(args.data, args.graph, options)
    paths = write_outputs(report, artifacts, args.out, svg=args.svg)
    for name in ("crude", "traditional", "adjusted"):
        entry = getattr(report, name).to_dict()
        if "error" in entry:
            print(f"{name}: failed ({entry['error']})")
        else:
            lo, hi = entry["ci"]
            print(f"{name}: HR {entry['hr']:.4f} (CI {lo:.4f}-{hi:.4f})")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


def _cmd_backdoor(args) -> int:
    dag = load_graph(args.graph)
    sets = minimal_backdoor_sets(dag, args.treatment, args.outcome)
    if not sets:
        print("NOT IDENTIFIABLE (backdoor)")
        return EXIT_NOT_IDENTIFIABLE
    for s in sets:
        print("{" + ", ".join(s.sorted_members()) + "}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = SimConfig(
        n=args.n,
        seed=args.seed,
        p_treat_given_z={0: args.bias, 1: 1.0 - args.bias},
    )
    cohort = generate_cohort(config)
    if args.out:
        save_cohort(cohort, args.out)
    else:
        save_cohort(cohort, sys.stdout)
    arms = cohort.arm_sizes()
    counts = stratum_counts(cohort, {"z"})
    summary = {}
    for level in cohort.covariate_levels["z"]:
        total = counts.marginals[(level,)]
        treated = counts.counts[(1, (level,))]
        summary[level] = treated / total if total else float("nan")
    bias = ", ".join(f"P(x=1|z={lvl})={p:.3f}" for lvl, p in sorted(summary.items()))
    print(
        f"n={cohort.n} arms: control={arms[0]} treated={arms[1]} "
        f"t_max={cohort.t_max} {bias}",
        file=sys.stderr if not args.out else sys.stdout,
    )
    return EXIT_OK


def _error_payload(exc: Exception, code: int) -> str:
    return json.dumps(
        {"error": {"type": type(exc).__name__, "message": str(exc), "exit": code}}
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NotIdentifiable, InvalidAdjustmentSet) as exc:
        print(_error_payload(exc, EXIT_NOT_IDENTIFIABLE))
        return EXIT_NOT_IDENTIFIABLE
    except EstimationError as exc:
        print(_error_payload(exc, EXIT_NUMERICAL))
        return EXIT_NUMERICAL
    except (
        CohortError,
        GraphError,
        InvalidConfig,
        PositivityViolation,
        NonMonotoneCounts,
        OSError,
    ) as exc:
        print(_error_payload(exc, EXIT_DATA))
        return EXIT_DATA
    except CausalSurvError as exc:
        print(_error_payload(exc, EXIT_DATA))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
