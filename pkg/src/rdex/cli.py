"""``rdex`` command line: run, score, compare and report.

Exit codes: 0 success, 2 configuration or parse error, 3 I/O error,
4 missing data, 5 unknown reference algorithm or function.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness, plotting, report
from .report import REPORT_META

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_MISSING, EXIT_REFERENCE = 0, 2, 3, 4, 5

log = logging.getLogger("rdex")


def _alpha(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie strictly between 0 and 1")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdex", description=__doc__.splitlines()[0])
    parser.add_argument("--verbose", "-v", action="store_true", help="debug-level progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment plan")
    p.add_argument("--plan", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--threads", type=_positive, default=None,
                   help="worker processes (default: $RDEX_THREADS or 1)")
    p.add_argument("--resume", action="store_true", help="skip runs already in the manifest")
    p.add_argument("--gen-log", action="store_true", help="write per-generation RDEx diagnostics")

    p = sub.add_parser("score", help="U-score ranking from a finished experiment")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("compare", help="pairwise tests against a reference algorithm")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--ref", required=True)
    p.add_argument("--alpha", type=_alpha, default=0.05)

    p = sub.add_parser("report", help="median convergence curves for one function")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--function", required=True)
    return parser


def cmd_run(args) -> int:
    try:
        plan = harness.load_plan(args.plan)
    except OSError as exc:
        log.error("cannot read plan: %s", exc)
        return EXIT_IO
    except harness.PlanError as exc:
        log.error("%s: %s", args.plan, exc)
        return EXIT_CONFIG
    try:
        harness.execute(plan, args.out, threads=args.threads, resume=args.resume, gen_log=args.gen_log)
    except harness.PlanError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except harness.MissingDataError as exc:
        log.error("cannot resume: %s", exc)
        return EXIT_MISSING
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    return EXIT_OK


def _load(out: Path):
    try:
        traces = harness.load_traces(out)
        report.check_complete(traces)
    except (harness.MissingDataError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return None
    return traces


def cmd_score(args) -> int:
    traces = _load(args.out)
    if traces is None:
        return EXIT_MISSING
    tgt, rows, per_function, ranking = report.score(traces)
    out = args.out
    report.write_table(out / "targets.tsv", ("function", "target"), sorted(tgt.items()), REPORT_META)
    report.write_table(
        out / "run_metrics.tsv",
        ("algorithm", "function", "run", "final", "ttt", "auc"),
        [(r.algorithm, r.function, r.run, r.final, r.ttt, r.auc) for r in rows],
        REPORT_META,
    )
    report.write_table(
        out / "function_scores.tsv",
        ("function", "algorithm", "speed", "accuracy"),
        [(f, a, s, acc) for f, by_alg in per_function.items() for a, (s, acc) in by_alg.items()],
        REPORT_META,
    )
    report.write_table(
        out / "scores.tsv",
        ("rank", "algorithm", "total", "avg_per_problem", "speed", "accuracy"),
        [(r.rank, r.algorithm, r.total, r.avg_per_problem, r.speed, r.accuracy) for r in ranking],
        REPORT_META,
    )
    plotting.score_figure(ranking, out / "scores.png")
    print(report.format_ranking(ranking))
    return EXIT_OK


def cmd_compare(args) -> int:
    traces = _load(args.out)
    if traces is None:
        return EXIT_MISSING
    algs = report.algorithms_of(traces)
    if args.ref not in algs:
        log.error("unknown reference algorithm %r; known: %s", args.ref, ", ".join(algs))
        return EXIT_REFERENCE
    if len(algs) < 2:
        log.error("comparison needs at least two algorithms")
        return EXIT_MISSING
    pairwise, friedman_rows, algs = report.compare(traces, args.ref, args.alpha)
    meta = f"{REPORT_META} reference={args.ref} alpha={args.alpha!r}"
    pair_path = report.write_table(
        args.out / "pairwise.tsv",
        ("competitor", "metric", "W/T/L", "holm W/T/L", "median A12"),
        pairwise,
        meta,
    )
    fr_path = report.write_table(
        args.out / "friedman.tsv",
        ("metric", "chi2", "df", "p", *algs),
        [(m, chi2, df, p, *ranks) for m, chi2, df, p, ranks in friedman_rows],
        meta,
    )
    sys.stdout.write(pair_path.read_text())
    sys.stdout.write(fr_path.read_text())
    return EXIT_OK


def cmd_report(args) -> int:
    traces = _load(args.out)
    if traces is None:
        return EXIT_MISSING
    try:
        curves = report.median_curves(traces, args.function)
    except KeyError:
        log.error("unknown function %r", args.function)
        return EXIT_REFERENCE
    base = args.out / "curves" / args.function
    for alg, curve in curves.items():
        path = report.write_table(
            base / f"{alg}.tsv",
            ("checkpoint", "median"),
            [(i, float(v)) for i, v in enumerate(curve, start=1)],
        )
        print(path)
    print(plotting.convergence_figure(curves, base.with_suffix(".png"), title=args.function))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "score": cmd_score, "compare": cmd_compare, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage and 0 on --help
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
