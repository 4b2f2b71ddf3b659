"""Turn a directory of traces into score, comparison and convergence tables."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from . import metrics
from .trace import RunTrace

Traces = Mapping[Tuple[str, str], Sequence[RunTrace]]

REPORT_META = "# target=pooled-median speed=time-to-target zero_threshold=1e-08"
METRIC_NAMES = ("final", "ttt", "auc")


@dataclass
class ScoreRow:
    algorithm: str
    total: float
    avg_per_problem: float
    speed: float
    accuracy: float
    rank: int = 0


@dataclass
class RunMetrics:
    algorithm: str
    function: str
    run: int
    final: float
    ttt: int
    auc: float


def algorithms_of(traces: Traces) -> List[str]:
    return list(dict.fromkeys(a for a, _ in traces))


def functions_of(traces: Traces) -> List[str]:
    return list(dict.fromkeys(f for _, f in traces))


def check_complete(traces: Traces) -> None:
    """Every algorithm needs runs on every function, all of one trace length."""
    algs, fns = algorithms_of(traces), functions_of(traces)
    for a in algs:
        for f in fns:
            if (a, f) not in traces or not traces[(a, f)]:
                raise ValueError(f"no runs for {a} on {f}")
    lengths = {len(t) for runs in traces.values() for t in runs}
    if len(lengths) != 1:
        raise ValueError("traces have different checkpoint counts")


def targets(traces: Traces) -> Dict[str, float]:
    """Per-function median target over the pooled finals of all algorithms."""
    out = {}
    for f in functions_of(traces):
        finals = [t.final for (a, g), runs in traces.items() if g == f for t in runs]
        out[f] = metrics.compute_target(metrics.snap(finals))
    return out


def run_metrics(traces: Traces, tgt: Mapping[str, float]) -> List[RunMetrics]:
    rows = []
    for (a, f), runs in traces.items():
        for r, t in enumerate(runs):
            cp = metrics.snap(t.checkpoints)
            rows.append(
                RunMetrics(a, f, r, float(cp[-1]), metrics.time_to_target(cp, tgt[f]),
                           metrics.auc(cp, tgt[f]))
            )
    return rows


def _samples(rows: Sequence[RunMetrics], metric: str) -> Dict[Tuple[str, str], np.ndarray]:
    grouped: Dict[Tuple[str, str], List[float]] = {}
    for row in rows:
        grouped.setdefault((row.algorithm, row.function), []).append(getattr(row, metric))
    return {k: np.asarray(v, dtype=float) for k, v in grouped.items()}


def score(traces: Traces):
    """U-score evaluation. Returns ``(targets, run_metrics, per_function, ranking)``.

    ``per_function`` maps function -> algorithm -> (speed, accuracy).
    """
    check_complete(traces)
    algs, fns = algorithms_of(traces), functions_of(traces)
    tgt = targets(traces)
    rows = run_metrics(traces, tgt)
    ttt = _samples(rows, "ttt")
    final = _samples(rows, "final")

    per_function: Dict[str, Dict[str, Tuple[float, float]]] = {}
    speed = dict.fromkeys(algs, 0.0)
    accuracy = dict.fromkeys(algs, 0.0)
    for f in fns:
        s = metrics.u_score({a: ttt[(a, f)] for a in algs})
        acc = metrics.u_score({a: final[(a, f)] for a in algs})
        per_function[f] = {a: (s[a], acc[a]) for a in algs}
        for a in algs:
            speed[a] += s[a]
            accuracy[a] += acc[a]

    ranking = [
        ScoreRow(a, speed[a] + accuracy[a], (speed[a] + accuracy[a]) / len(fns), speed[a], accuracy[a])
        for a in algs
    ]
    ranking.sort(key=lambda r: -r.total)
    for i, row in enumerate(ranking, start=1):
        row.rank = i
    return tgt, rows, per_function, ranking


def _wtl(verdicts: Sequence[str]) -> str:
    return f"{verdicts.count('win')}/{verdicts.count('tie')}/{verdicts.count('loss')}"


def compare(traces: Traces, reference: str, alpha: float = 0.05):
    """Pairwise reference-vs-competitor summaries and Friedman blocks.

    Returns ``(pairwise_rows, friedman_rows, algorithms)``.
    """
    check_complete(traces)
    algs, fns = algorithms_of(traces), functions_of(traces)
    if reference not in algs:
        raise KeyError(reference)
    tgt = targets(traces)
    rows = run_metrics(traces, tgt)
    samples = {m: _samples(rows, m) for m in METRIC_NAMES}

    pairwise = []
    for other in algs:
        if other == reference:
            continue
        for m in METRIC_NAMES:
            verdicts, pvals, effects = {}, {}, []
            for f in fns:
                x, y = samples[m][(reference, f)], samples[m][(other, f)]
                if np.all(np.concatenate([x, y]) == x[0]):
                    p, v = 1.0, "tie"
                else:
                    p, v = metrics.wilcoxon_ranksum(x, y, alpha)
                verdicts[f], pvals[f] = v, p
                effects.append(metrics.a12(x, y))
            holm = metrics.holm_correct(pvals, alpha)
            holm_verdicts = [verdicts[f] if holm[f][0] else "tie" for f in fns]
            pairwise.append(
                (other, m, _wtl(list(verdicts.values())), _wtl(holm_verdicts), float(np.median(effects)))
            )

    friedman_rows = []
    for m in METRIC_NAMES:
        med = np.array([[np.median(samples[m][(a, f)]) for a in algs] for f in fns])
        if len(fns) < 2 or len(algs) < 2:
            friedman_rows.append((m, float("nan"), len(algs) - 1, float("nan"), [float("nan")] * len(algs)))
            continue
        chi2, df, avg, p = metrics.friedman(med)
        friedman_rows.append((m, chi2, df, p, list(avg)))
    return pairwise, friedman_rows, algs


def median_curves(traces: Traces, function: str) -> Dict[str, np.ndarray]:
    """Median best-so-far per checkpoint for each algorithm on ``function``."""
    curves = {}
    for (a, f), runs in traces.items():
        if f == function:
            curves[a] = np.median(np.vstack([t.checkpoints for t in runs]), axis=0)
    if not curves:
        raise KeyError(function)
    return curves


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_table(path, header: Sequence[str], rows, meta: str = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [meta] if meta else []
    lines.append("\t".join(header))
    lines.extend("\t".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def format_ranking(ranking: Sequence[ScoreRow]) -> str:
    lines = [f"{'rank':>4}  {'algorithm':<16}{'total':>12}{'avg/prob':>12}{'speed':>12}{'accuracy':>12}"]
    for r in ranking:
        lines.append(
            f"{r.rank:>4}  {r.algorithm:<16}{r.total:>12.1f}{r.avg_per_problem:>12.2f}"
            f"{r.speed:>12.1f}{r.accuracy:>12.1f}"
        )
    return "\n".join(lines)
