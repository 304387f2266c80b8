"""Evaluation protocol: stratified folds, AUC, paired tests, full reports.

The fold partition is created once per corpus through stratified sampling
of the label and reused for every model so that per-fold results stay
paired. Feature statistics are always fitted on the four training folds
only; the test fold never leaks into them.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as sstats

from . import tree as tree_mod
from .features import CoarseFeatureVector, compute_vector
from .ingest import (
    load_corpus,
    write_features_csv,
    write_labels_csv,
    write_narrative,
    write_stats,
)
from .model import binarize_label
from .narrative import (
    CorpusStats,
    config_slug,
    fit_fine_stats,
    fit_stats,
    parse_config,
    weave,
    z_score,
)
from .registry import registry


class DegenerateLabels(ValueError):
    """AUC needs at least one positive and one negative."""


class InsufficientClassCount(ValueError):
    """Stratified folding needs at least k members of each class."""


class LengthMismatch(ValueError):
    """Paired comparison requires equally long AUC lists."""


def worker_count() -> int:
    """Parallelism cap from MONAH_THREADS; defaults to sequential."""
    try:
        return max(1, int(os.environ.get("MONAH_THREADS", "1")))
    except ValueError:
        return 1


def _map_sessions(fn, items):
    n = worker_count()
    if n <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def auc(scores: Iterable[tuple[float, bool]]) -> float:
    """Rank-based (Mann-Whitney) AUC; tied scores count half."""
    pairs = list(scores)
    probs = np.array([p for p, _ in pairs], dtype=float)
    labels = np.array([bool(l) for _, l in pairs])
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("need at least one positive and one negative label")
    ranks = sstats.rankdata(probs)
    pos_rank_sum = float(ranks[labels].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class FoldAssignment:
    assignment: Mapping[str, int]
    k: int
    seed: int

    def fold_of(self, session_id: str) -> int:
        return self.assignment[session_id]

    def test_ids(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f != fold)


def stratified_folds(labels: Mapping[str, bool], k: int = 5, seed: int = 0) -> FoldAssignment:
    """Deal each class round-robin after a seeded shuffle.

    Per-fold class counts differ by at most one, so per-fold positive rates
    stay balanced. Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    assignment: dict[str, int] = {}
    for cls in (True, False):
        ids = sorted(sid for sid, lab in labels.items() if lab == cls)
        if len(ids) < k:
            raise InsufficientClassCount(
                f"class {cls} has {len(ids)} sessions; need at least {k}"
            )
        order = rng.permutation(len(ids))
        for pos, idx in enumerate(order):
            assignment[ids[idx]] = pos % k
    return FoldAssignment(assignment=assignment, k=k, seed=seed)


T_975_DF4 = 2.7764451051977987  # t(0.975, 4), the 5-fold case


@dataclass(frozen=True)
class Comparison:
    """Paired t-test on per-fold AUC differences (a minus b)."""

    n: int
    mean_diff: float
    t: float | None
    p: float | None
    ci95: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_diff": self.mean_diff,
            "t": self.t,
            "p": self.p,
            "ci95": list(self.ci95),
        }


def paired_compare(
    aucs_a: Sequence[float], aucs_b: Sequence[float], tail: str = "two"
) -> Comparison:
    """Fold-paired t-test; ``tail="one"`` tests whether a beats b.

    All-zero differences give t=0, p=1, CI [0, 0]. Zero-variance nonzero
    differences leave t undefined: only the (degenerate) CI is reported.
    """
    if len(aucs_a) != len(aucs_b):
        raise LengthMismatch(f"{len(aucs_a)} vs {len(aucs_b)} folds")
    if tail not in ("one", "two"):
        raise ValueError("tail must be 'one' or 'two'")
    n = len(aucs_a)
    if n < 2:
        raise LengthMismatch("need at least 2 folds")
    diffs = [a - b for a, b in zip(aucs_a, aucs_b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    sd = math.sqrt(var)
    if sd == 0.0:
        if mean == 0.0:
            return Comparison(n=n, mean_diff=0.0, t=0.0, p=1.0, ci95=(0.0, 0.0))
        return Comparison(n=n, mean_diff=mean, t=None, p=None, ci95=(mean, mean))
    se = sd / math.sqrt(n)
    t = mean / se
    if tail == "one":
        p = float(sstats.t.sf(t, df=n - 1))
    else:
        p = float(2.0 * sstats.t.sf(abs(t), df=n - 1))
    half = float(sstats.t.ppf(0.975, df=n - 1)) * se
    return Comparison(n=n, mean_diff=mean, t=t, p=p, ci95=(mean - half, mean + half))


def significance_marker(p: float | None, symbol: str = "*") -> str:
    """Table-style markers: 3 symbols at 0.01, 2 at 0.05, 1 at 0.10."""
    if p is None:
        return "n/a"
    if p < 0.01:
        return symbol * 3
    if p < 0.05:
        return symbol * 2
    if p < 0.10:
        return symbol
    return ""


# --------------------------------------------------------------------------
# experiment protocol
# --------------------------------------------------------------------------

DEFAULT_ROWS = ("D'A'P'", "H", "DH", "PAH", "APMH", "APSMH", "DAPSMH")


@dataclass(frozen=True)
class ModelResult:
    fold_aucs: tuple[float, ...]

    @property
    def mean(self) -> float:
        return sum(self.fold_aucs) / len(self.fold_aucs)

    @property
    def sd(self) -> float:
        m = self.mean
        return math.sqrt(sum((a - m) ** 2 for a in self.fold_aucs) / len(self.fold_aucs))

    def as_dict(self) -> dict:
        return {"fold_aucs": list(self.fold_aucs), "mean": self.mean, "sd": self.sd}


def z_transform_row(
    vector: CoarseFeatureVector, stats: CorpusStats, names: Sequence[str]
) -> list[float]:
    """z-scored feature row; absent values and absent stats become NaN."""
    out = []
    for name in names:
        v = vector.values.get(name)
        entry = stats.get(name)
        if v is None or entry is None:
            out.append(math.nan)
        else:
            out.append(z_score(v, entry))
    return out


def tree_cv_aucs(
    vectors: Mapping[str, CoarseFeatureVector],
    labels: Mapping[str, bool],
    folds: FoldAssignment,
    stats_per_fold: Sequence[CorpusStats],
    names: Sequence[str],
    params: tree_mod.TreeParams,
) -> list[float]:
    """Per-fold test AUCs for one parameter set, stats from training folds only."""
    fold_aucs = []
    for k in range(folds.k):
        stats = stats_per_fold[k]
        train_ids = folds.train_ids(k)
        test_ids = folds.test_ids(k)
        X_train = np.array([z_transform_row(vectors[s], stats, names) for s in train_ids])
        y_train = [labels[s] for s in train_ids]
        model = tree_mod.fit(X_train, y_train, params, feature_names=names)
        scored = []
        for sid in test_ids:
            row = z_transform_row(vectors[sid], stats, names)
            scored.append((tree_mod.predict_proba(model, row), labels[sid]))
        fold_aucs.append(auc(scored))
    return fold_aucs


NarrativeHook = Callable[[str, int, list, list], Mapping[str, float]]


def run_experiment(
    corpus_path: str | Path,
    rows: Sequence[str] = DEFAULT_ROWS,
    trials: int = 20,
    seed: int = 7,
    k: int = 5,
    fine: str = "",
    out_dir: str | Path | None = None,
    lexicon: Mapping[str, float] | None = None,
    narrative_hook: NarrativeHook | None = None,
) -> dict:
    """Run the full protocol on a corpus and return the report dict.

    For every row configuration: a 20-trial random search over the tree
    hyperparameters, scored by 5-fold CV AUC with fold-local training
    statistics; narratives woven per fold for downstream text classifiers;
    and row-vs-baseline / column-wise paired comparisons.
    """
    from .sentiment import load_lexicon

    if lexicon is None:
        lexicon = load_lexicon()
    out = Path(out_dir) if out_dir is not None else None
    sessions = load_corpus(corpus_path)
    by_id = {s.meta.session_id: s for s in sessions}
    labels = {sid: binarize_label(s.meta.rapport_score) for sid, s in by_id.items()}
    folds = stratified_folds(labels, k=k, seed=seed)
    all_meta = [s.meta for s in sessions]
    reg = registry()

    vector_list = _map_sessions(
        lambda s: compute_vector(s, lexicon, all_meta, reg), sessions
    )
    vectors = {v.session_id: v for v in vector_list}

    stats_per_fold: list[CorpusStats] = []
    for fold in range(k):
        train_vecs = [vectors[s] for s in folds.train_ids(fold)]
        stats = fit_stats(train_vecs)
        stats.update(fit_fine_stats(by_id[s] for s in folds.train_ids(fold)))
        stats_per_fold.append(stats)

    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_labels_csv(labels, out / "labels.csv")
        write_folds(folds, out / "folds.json")
        write_features_csv(
            [vectors[sid] for sid in sorted(vectors)], reg.names, out / "features.csv"
        )
        for fold in range(k):
            fold_dir = out / "folds" / f"fold{fold}"
            fold_dir.mkdir(parents=True, exist_ok=True)
            write_stats(stats_per_fold[fold], fold_dir / "stats.json")

    # weave narratives per row config (and the fine variant when requested)
    woven_configs = []
    for row in rows:
        woven_configs.append(row)
        if fine:
            woven_configs.append(f"{row}-{fine}")
    narratives: dict[str, list[dict[str, object]]] = {}
    for config_str in woven_configs:
        config = parse_config(config_str)
        per_fold = []
        for fold in range(k):
            stats = stats_per_fold[fold]
            fold_narr = {}
            for sid in sorted(by_id):
                narr, _ = weave(by_id[sid], vectors[sid], stats, config)
                fold_narr[sid] = narr
                if out is not None:
                    ndir = out / "narratives" / config_slug(config_str) / f"fold{fold}"
                    ndir.mkdir(parents=True, exist_ok=True)
                    write_narrative(narr, ndir / f"{sid}.json")
            per_fold.append(fold_narr)
        narratives[config_str] = per_fold

    tree_results: dict[str, dict] = {}
    for row in rows:
        names = reg.select(parse_config(row).coarse_modes)
        best_params, log = tree_mod.random_search(
            lambda params: tree_cv_aucs(vectors, labels, folds, stats_per_fold, names, params),
            trials=trials,
            seed=seed,
        )
        best_trial = max(log, key=lambda t: t.mean_auc)
        tree_results[row] = {
            "fold_aucs": list(best_trial.fold_aucs),
            "params": {
                "cp": best_params.cp,
                "max_depth": best_params.max_depth,
                "min_split": best_params.min_split,
            },
        }
        if out is not None:
            row_dir = out / "tree" / config_slug(row)
            row_dir.mkdir(parents=True, exist_ok=True)
            _write_trials_csv(log, row_dir / "trials.csv")
            _write_curve_csv(log, row_dir / "curves.csv")

    model_results: dict[str, dict] = {}
    if narrative_hook is not None:
        for config_str in woven_configs:
            scores: list[tuple[float, bool]] = []
            fold_aucs = []
            for fold in range(k):
                train = [
                    (narratives[config_str][fold][sid], labels[sid])
                    for sid in folds.train_ids(fold)
                ]
                test = [narratives[config_str][fold][sid] for sid in folds.test_ids(fold)]
                probs = narrative_hook(config_str, fold, train, test)
                fold_scored = [(probs[sid], labels[sid]) for sid in folds.test_ids(fold)]
                fold_aucs.append(auc(fold_scored))
                scores.extend(fold_scored)
            model_results[config_str] = {"fold_aucs": fold_aucs}

    baseline = rows[0]
    report = build_report(
        rows=list(rows),
        baseline=baseline,
        tree_results=tree_results,
        model_results=model_results or None,
        fine=fine,
        meta={"seed": seed, "k": k, "trials": trials, "n_sessions": len(sessions)},
    )
    if out is not None:
        write_report(report, out)
    return report


def write_folds(folds: FoldAssignment, path: str | Path) -> None:
    import json

    payload = {
        "seed": folds.seed,
        "k": folds.k,
        "assignment": {sid: folds.assignment[sid] for sid in sorted(folds.assignment)},
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_folds(path: str | Path) -> FoldAssignment:
    import json

    obj = json.loads(Path(path).read_text("utf-8"))
    return FoldAssignment(
        assignment={k: int(v) for k, v in obj["assignment"].items()},
        k=int(obj["k"]),
        seed=int(obj["seed"]),
    )


def _write_trials_csv(log, path: Path) -> None:
    import csv

    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "cp", "max_depth", "min_split", "mean_auc", "sd_auc"])
        for t in log:
            writer.writerow(
                [t.index, repr(t.params.cp), t.params.max_depth, t.params.min_split,
                 repr(t.mean_auc), repr(t.sd_auc)]
            )


def _write_curve_csv(log, path: Path) -> None:
    import csv

    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_trials", "best_mean_auc"])
        for i, best in enumerate(tree_mod.cumulative_best(log), start=1):
            writer.writerow([i, repr(best)])


def build_report(
    rows: Sequence[str],
    baseline: str,
    tree_results: Mapping[str, dict],
    model_results: Mapping[str, dict] | None = None,
    fine: str = "",
    meta: Mapping[str, object] | None = None,
) -> dict:
    """Assemble the summary-table report with markers and CIs.

    Row-wise comparisons (vs the baseline row) are one-tailed and marked
    with asterisks; column-wise comparisons (text model vs tree, coarse+fine
    vs coarse-only) are two-tailed and marked with carets.
    """
    model_results = model_results or {}
    report_rows = []
    base_tree = ModelResult(tuple(tree_results[baseline]["fold_aucs"]))
    base_model = None
    if baseline in model_results:
        base_model = ModelResult(tuple(model_results[baseline]["fold_aucs"]))
    for row in rows:
        tree_res = ModelResult(tuple(tree_results[row]["fold_aucs"]))
        entry: dict[str, object] = {
            "config": row,
            "tree": {**tree_res.as_dict(), "params": tree_results[row].get("params")},
        }
        if row != baseline:
            cmp_q1 = paired_compare(tree_res.fold_aucs, base_tree.fold_aucs, tail="one")
            entry["tree_vs_baseline"] = {
                **cmp_q1.as_dict(),
                "marker": significance_marker(cmp_q1.p, "*"),
            }
        coarse_key = row
        fine_key = f"{row}-{fine}" if fine else None
        if coarse_key in model_results:
            model_res = ModelResult(tuple(model_results[coarse_key]["fold_aucs"]))
            entry["coarse_model"] = model_res.as_dict()
            if row != baseline and base_model is not None:
                cmp_m1 = paired_compare(
                    model_res.fold_aucs, base_model.fold_aucs, tail="one"
                )
                entry["coarse_model_vs_baseline"] = {
                    **cmp_m1.as_dict(),
                    "marker": significance_marker(cmp_m1.p, "*"),
                }
            cmp_q2 = paired_compare(model_res.fold_aucs, tree_res.fold_aucs, tail="two")
            entry["coarse_model_vs_tree"] = {
                **cmp_q2.as_dict(),
                "marker": significance_marker(cmp_q2.p, "^"),
            }
            if fine_key and fine_key in model_results:
                fine_res = ModelResult(tuple(model_results[fine_key]["fold_aucs"]))
                entry["fine_model"] = fine_res.as_dict()
                cmp_q3 = paired_compare(
                    fine_res.fold_aucs, model_res.fold_aucs, tail="two"
                )
                entry["fine_vs_coarse_model"] = {
                    **cmp_q3.as_dict(),
                    "marker": significance_marker(cmp_q3.p, "^"),
                }
        report_rows.append(entry)
    return {
        "meta": dict(meta or {}),
        "baseline": baseline,
        "fine": fine,
        "rows": report_rows,
    }


def _cell(res: dict | None, marker: str = "") -> str:
    if res is None:
        return "n/a"
    text = f"{res['mean']:.3f} ({res['sd']:.3f})"
    if marker:
        text += f" {marker}"
    return text


def _ci_cell(cmp: dict | None) -> str:
    if cmp is None:
        return ""
    lo, hi = cmp["ci95"]
    text = f"[{lo:.3f}, {hi:.3f}]"
    if cmp.get("marker"):
        text += f" {cmp['marker']}"
    return text


def render_report_md(report: dict) -> str:
    lines = [
        "# model performance summary",
        "",
        f"baseline row: {report['baseline']}  "
        f"(markers: */**/*** at 0.10/0.05/0.01 vs baseline, ^ column-wise)",
        "",
        "| coarse inputs | tree | coarse-only (text model) | diff (text vs tree) |"
        " coarse + fine (text model) | diff (fine vs coarse-only) |",
        "|---|---|---|---|---|---|",
    ]
    for row in report["rows"]:
        tree_marker = row.get("tree_vs_baseline", {}).get("marker", "")
        coarse = row.get("coarse_model")
        coarse_marker = row.get("coarse_model_vs_baseline", {}).get("marker", "")
        fine_m = row.get("fine_model")
        lines.append(
            "| {config} | {tree} | {coarse} | {q2} | {fine} | {q3} |".format(
                config=row["config"],
                tree=_cell(row["tree"], tree_marker),
                coarse=_cell(coarse, coarse_marker) if coarse else "n/a",
                q2=_ci_cell(row.get("coarse_model_vs_tree")),
                fine=_cell(fine_m) if fine_m else "n/a",
                q3=_ci_cell(row.get("fine_vs_coarse_model")),
            )
        )
    lines.append("")
    return "\n".join(lines)


def write_report(report: dict, out_dir: str | Path) -> None:
    import json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report, indent=2) + "\n", encoding="utf-8"
    )
    (out / "report.md").write_text(render_report_md(report), encoding="utf-8")
