"""Command line front end.

Three subcommands compose the pipeline end to end:

- ``lscd gcd``: score every gold target with a form- or sense-based measure
  over precomputed embeddings and evaluate the ranking against gold.
- ``lscd annotate``: use embeddings as a computational annotator on the
  humanly annotated usage pairs, build the usage graph, induce senses, and
  score change from the graph.
- ``lscd layers``: sweep encoder-layer combinations (sum / concatenation)
  and rerun the chosen measure per combination.

Exit status: 0 on success, 1 on data errors, 2 on configuration errors.
Reports echo every semantic parameter (paths, method, thresholds, seeds);
the worker-pool size is deliberately not part of the report so that
``--jobs`` cannot change the output bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import dataio
from .annotator import ScaleMap, build_usage_graph, compare_metric, graph_gcd, wic_judgments, wsi
from .clustering import ApParams, CorrParams
from .core import ChangeScore, Clustering, DomainError, LscdError, SchemaError
from .form_measures import apd, prt
from .geometry import DistanceKind, LayerMode, aggregate_layers, enumerate_layer_combos
from .metrics import adjusted_rand_index, purity, spearman
from .sense_measures import ap_jsd, widid

METHODS = ("apd", "prt", "ap-jsd", "widid")


class ConfigError(Exception):
    """Bad flag values; maps to exit status 2."""


def _default_jobs() -> int:
    raw = os.environ.get("LSC_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lscd",
        description="Graded lexical semantic change detection over contextualized embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--emb-dir", required=True, help="embedding directory")
        p.add_argument("--gold", required=True, help="gold graded scores file")
        p.add_argument("--out", required=True, help="report output path")
        p.add_argument("--layer", default=None, help="layer subdirectory to load")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--jobs", type=int, default=_default_jobs())

    gcd = sub.add_parser("gcd", help="score targets with a change measure")
    common(gcd)
    gcd.add_argument("--method", required=True, help="|".join(METHODS))
    gcd.add_argument("--distance", default="cosine", help="cosine|canberra (APD only)")

    ann = sub.add_parser("annotate", help="computational annotation pipeline")
    common(ann)
    ann.add_argument("--uses", required=True, help="uses file")
    ann.add_argument("--judgments", required=True, help="human judgments file")
    ann.add_argument("--gold-clusters", default=None, help="gold sense clusters file")
    ann.add_argument("--tau", type=float, default=2.5, help="clustering threshold")
    ann.add_argument("--scale-map", default="linear:1:4", help="linear:LO:HI or raw")
    ann.add_argument("--restarts", type=int, default=20)
    ann.add_argument(
        "--ru-procedure",
        action="store_true",
        help="score change as inverted mean cross-period relatedness",
    )

    lay = sub.add_parser("layers", help="sweep layer combinations")
    common(lay)
    lay.add_argument("--method", required=True, help="|".join(METHODS))
    lay.add_argument("--distance", default="cosine")
    lay.add_argument("--lengths", required=True, help="comma list of combo sizes, e.g. 2,3,4")
    lay.add_argument("--mode", default="both", help="sum|cat|both")
    return parser


def _parse_method(name: str) -> str:
    if name not in METHODS:
        raise ConfigError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}")
    return name


def _parse_distance(name: str) -> DistanceKind:
    try:
        return DistanceKind(name)
    except ValueError:
        raise ConfigError(f"unknown distance {name!r}; expected cosine or canberra") from None


def _parse_lengths(raw: str) -> list[int]:
    try:
        lengths = sorted({int(t) for t in raw.split(",") if t.strip()})
    except ValueError:
        raise ConfigError(f"cannot parse --lengths {raw!r}") from None
    if not lengths or any(v < 1 for v in lengths):
        raise ConfigError(f"--lengths must be positive integers, got {raw!r}")
    return lengths


def _parse_mode(raw: str) -> list[LayerMode]:
    if raw == "both":
        return [LayerMode.SUM, LayerMode.CONCAT]
    try:
        return [LayerMode(raw)]
    except ValueError:
        raise ConfigError(f"unknown --mode {raw!r}; expected sum, cat or both") from None


def _emb_root(args) -> Path:
    root = Path(args.emb_dir)
    if args.layer is not None:
        root = root / str(args.layer)
    return root


def _infer_periods(periods: set[str]) -> tuple[str, str]:
    ordered = sorted(periods)
    if len(ordered) != 2:
        raise DomainError(
            f"expected exactly two periods, found {ordered or 'none'}"
        )
    return ordered[0], ordered[1]


def _run_pool(
    jobs: int, lemmas: Sequence[str], worker: Callable[[str], object]
) -> dict[str, object]:
    results: dict[str, object] = {}
    if jobs <= 1:
        for lemma in lemmas:
            results[lemma] = worker(lemma)
        return results
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for lemma, result in zip(lemmas, pool.map(worker, lemmas)):
            results[lemma] = result
    return results


def _score_worker(method: str, distance: DistanceKind, seed: int):
    ap_params = ApParams(seed=seed)

    def run(phi1, phi2) -> ChangeScore:
        if method == "apd":
            return apd(phi1, phi2, distance)
        if method == "prt":
            return prt(phi1, phi2)
        if method == "ap-jsd":
            return ap_jsd(phi1, phi2, ap_params)
        return widid(phi1, phi2, ap_params)

    return run


def _evaluate_ranking(
    predicted: Mapping[str, float], gold: Mapping[str, float]
) -> tuple[dict | None, str | None]:
    lemmas = sorted(set(predicted) & set(gold))
    if len(lemmas) < 2:
        return None, f"spearman needs at least 2 scored targets, have {len(lemmas)}"
    x = [predicted[w] for w in lemmas]
    y = [gold[w] for w in lemmas]
    try:
        rho = spearman(x, y)
    except DomainError as exc:
        return None, f"spearman undefined: {exc}"
    return {"spearman": rho, "n_targets": len(lemmas)}, None


def cmd_gcd(args) -> int:
    method = _parse_method(args.method)
    distance = _parse_distance(args.distance)

    gold = dataio.load_gold(args.gold)
    store = dataio.load_embeddings(_emb_root(args))
    t1, t2 = _infer_periods({period for (_, period) in store})

    gold_by_lemma = {g.lemma: g.graded for g in gold}
    lemmas = sorted(gold_by_lemma)
    score = _score_worker(method, distance, args.seed)
    warnings: list[str] = []

    def worker(lemma: str):
        phi1 = store.get((lemma, t1))
        phi2 = store.get((lemma, t2))
        if phi1 is None or phi2 is None:
            return DomainError(f"missing embeddings for {lemma!r} in one of {t1!r}, {t2!r}")
        try:
            return score(phi1, phi2)
        except LscdError as exc:
            return exc

    results = _run_pool(args.jobs, lemmas, worker)
    targets: dict[str, dict] = {}
    predicted: dict[str, float] = {}
    for lemma in lemmas:
        result = results[lemma]
        if isinstance(result, Exception):
            warnings.append(f"skipped {lemma}: {result}")
            continue
        predicted[lemma] = result.value
        targets[lemma] = {
            "method": result.method.value,
            "value": result.value,
            "period_pair": list(result.period_pair),
            "meta": dict(result.meta),
        }

    evaluation, eval_warning = _evaluate_ranking(predicted, gold_by_lemma)
    if eval_warning:
        warnings.append(eval_warning)

    report = {
        "command": "gcd",
        "config": {
            "method": method,
            "distance": distance.value,
            "emb_dir": str(args.emb_dir),
            "layer": args.layer,
            "gold": str(args.gold),
            "out": str(args.out),
            "seed": args.seed,
        },
        "periods": [t1, t2],
        "targets": targets,
        "evaluation": evaluation or {},
        "warnings": warnings,
    }
    dataio.write_report(report, args.out)
    return 0


def cmd_annotate(args) -> int:
    mapping = _parse_scale_map(args.scale_map)
    if not 1.0 <= args.tau <= 4.0:
        raise ConfigError(f"--tau {args.tau} outside the judgment scale [1, 4]")

    usages = dataio.load_uses(args.uses)
    human, skipped_zero = dataio.load_judgments(args.judgments)
    store = dataio.load_embeddings(_emb_root(args))
    gold = {g.lemma: g.graded for g in dataio.load_gold(args.gold)}
    gold_clusters = (
        dataio.load_gold_clusters(args.gold_clusters) if args.gold_clusters else None
    )

    t1, t2 = _infer_periods({u.period_id for u in usages})
    by_lemma: dict[str, list] = {}
    for u in usages:
        by_lemma.setdefault(u.lemma, []).append(u)
    lemmas = sorted(by_lemma)

    vectors_by_lemma: dict[str, dict[str, np.ndarray]] = {w: {} for w in lemmas}
    for (lemma, _), emb in store.items():
        if lemma in vectors_by_lemma:
            matrix = emb.matrix
            for i, uid in enumerate(emb.usage_ids):
                vectors_by_lemma[lemma][uid] = matrix[i]

    human_by_lemma: dict[str, dict[tuple[str, str], list[float]]] = {w: {} for w in lemmas}
    usage_ids_by_lemma = {w: {u.usage_id for u in by_lemma[w]} for w in lemmas}
    for j in human:
        for lemma in lemmas:
            ids = usage_ids_by_lemma[lemma]
            if j.usage_id_1 in ids and j.usage_id_2 in ids:
                human_by_lemma[lemma].setdefault(j.pair, []).append(j.value)
                break

    corr_params = CorrParams(threshold=args.tau, restarts=args.restarts, seed=args.seed)
    warnings: list[str] = []

    def worker(lemma: str):
        pairs = sorted(human_by_lemma[lemma])
        if not pairs:
            return DomainError(f"no annotated pairs for {lemma!r}")
        try:
            judgments, sims = wic_judgments(
                pairs, vectors_by_lemma[lemma], annotator_id="computational", mapping=mapping
            )
            graph = build_usage_graph(by_lemma[lemma], judgments)
            clustering = wsi(graph, corr_params)
            if args.ru_procedure:
                change = compare_metric(graph, (t1, t2))
            else:
                change = graph_gcd(graph, clustering, (t1, t2))
        except LscdError as exc:
            return exc
        return pairs, judgments, sims, clustering, change

    results = _run_pool(args.jobs, lemmas, worker)

    targets: dict[str, dict] = {}
    predicted: dict[str, float] = {}
    wic_pred: list[float] = []
    wic_human: list[float] = []
    ari_values: dict[str, float] = {}
    purity_values: dict[str, float] = {}

    for lemma in lemmas:
        result = results[lemma]
        if isinstance(result, Exception):
            warnings.append(f"skipped {lemma}: {result}")
            continue
        pairs, judgments, sims, clustering, change = result
        means = human_by_lemma[lemma]
        for pair, judgment in zip(pairs, judgments):
            wic_pred.append(judgment.value)
            wic_human.append(sum(means[pair]) / len(means[pair]))
        predicted[lemma] = change.value
        entry = {
            "method": change.method.value,
            "value": change.value,
            "period_pair": list(change.period_pair),
            "n_pairs": len(pairs),
            "n_clusters": clustering.n_clusters,
            "meta": dict(change.meta),
        }
        if gold_clusters and lemma in gold_clusters:
            common = sorted(set(clustering.assignment) & set(gold_clusters[lemma]))
            if len(common) >= 2:
                pred_sub = Clustering(
                    assignment={u: clustering.assignment[u] for u in common}
                )
                gold_sub = Clustering(
                    assignment={u: gold_clusters[lemma][u] for u in common}
                )
                entry["ari"] = adjusted_rand_index(pred_sub, gold_sub)
                entry["purity"] = purity(pred_sub, gold_sub)
                ari_values[lemma] = entry["ari"]
                purity_values[lemma] = entry["purity"]
            else:
                warnings.append(f"{lemma}: too few usages shared with gold clusters")
        targets[lemma] = entry

    evaluation: dict[str, object] = {}
    if len(wic_pred) >= 2:
        try:
            evaluation["wic_spearman"] = spearman(wic_pred, wic_human)
            evaluation["wic_n_pairs"] = len(wic_pred)
        except DomainError as exc:
            warnings.append(f"wic spearman undefined: {exc}")
    ranking, eval_warning = _evaluate_ranking(predicted, gold)
    if ranking:
        evaluation["gcd_spearman"] = ranking["spearman"]
        evaluation["gcd_n_targets"] = ranking["n_targets"]
    elif eval_warning:
        warnings.append(eval_warning)
    if ari_values:
        evaluation["ari_mean"] = sum(ari_values.values()) / len(ari_values)
        evaluation["purity_mean"] = sum(purity_values.values()) / len(purity_values)

    report = {
        "command": "annotate",
        "config": {
            "uses": str(args.uses),
            "judgments": str(args.judgments),
            "emb_dir": str(args.emb_dir),
            "layer": args.layer,
            "gold": str(args.gold),
            "gold_clusters": str(args.gold_clusters) if args.gold_clusters else None,
            "out": str(args.out),
            "tau": args.tau,
            "scale_map": str(mapping),
            "seed": args.seed,
            "restarts": args.restarts,
            "ru_procedure": bool(args.ru_procedure),
        },
        "periods": [t1, t2],
        "skipped_zero_judgments": skipped_zero,
        "targets": targets,
        "evaluation": evaluation,
        "warnings": warnings,
    }
    dataio.write_report(report, args.out)
    return 0


def _parse_scale_map(raw: str) -> ScaleMap:
    try:
        return ScaleMap.parse(raw)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def cmd_layers(args) -> int:
    method = _parse_method(args.method)
    distance = _parse_distance(args.distance)
    lengths = _parse_lengths(args.lengths)
    modes = _parse_mode(args.mode)

    root = Path(args.emb_dir)
    if not root.is_dir():
        raise SchemaError(f"{root}: not a directory")
    layer_dirs = sorted(
        (int(p.name) for p in root.iterdir() if p.is_dir() and p.name.isdigit())
    )
    if not layer_dirs:
        raise SchemaError(f"{root}: no numeric layer subdirectories")
    n_layers = max(layer_dirs)
    if layer_dirs != list(range(1, n_layers + 1)):
        raise SchemaError(f"{root}: layer directories are not contiguous 1..{n_layers}")

    gold = {g.lemma: g.graded for g in dataio.load_gold(args.gold)}
    lemmas = sorted(gold)
    stores = {k: dataio.load_embeddings(root / str(k)) for k in layer_dirs}
    t1, t2 = _infer_periods({p for store in stores.values() for (_, p) in store})

    combos = enumerate_layer_combos(n_layers, lengths)
    score = _score_worker(method, distance, args.seed)
    warnings: list[str] = []
    runs: dict[str, dict] = {}

    for combo in combos:
        for mode in modes:
            run_targets: dict[str, float] = {}

            def worker(lemma: str):
                try:
                    sets = {}
                    for period in (t1, t2):
                        stack = []
                        for k in range(1, n_layers + 1):
                            emb = stores[k].get((lemma, period))
                            if emb is None:
                                raise DomainError(
                                    f"missing embeddings for ({lemma!r}, {period!r}) layer {k}"
                                )
                            stack.append(emb)
                        sets[period] = aggregate_layers(stack, combo, mode)
                    return score(sets[t1], sets[t2])
                except LscdError as exc:
                    return exc

            results = _run_pool(args.jobs, lemmas, worker)
            run_key = f"{mode.value}:" + "+".join(map(str, combo))
            for lemma in lemmas:
                result = results[lemma]
                if isinstance(result, Exception):
                    warnings.append(f"skipped {lemma} for {run_key}: {result}")
                    continue
                run_targets[lemma] = result.value
            evaluation, eval_warning = _evaluate_ranking(run_targets, gold)
            runs[run_key] = {
                "mode": mode.value,
                "combo": list(combo),
                "targets": run_targets,
                "spearman": evaluation["spearman"] if evaluation else None,
            }
            if eval_warning:
                warnings.append(f"{run_key}: {eval_warning}")

    scored = {k: v["spearman"] for k, v in runs.items() if v["spearman"] is not None}
    best = max(scored, key=lambda k: (scored[k], k)) if scored else None

    report = {
        "command": "layers",
        "config": {
            "method": method,
            "distance": distance.value,
            "emb_dir": str(args.emb_dir),
            "gold": str(args.gold),
            "out": str(args.out),
            "lengths": lengths,
            "mode": args.mode,
            "seed": args.seed,
        },
        "periods": [t1, t2],
        "n_layers": n_layers,
        "n_runs": len(runs),
        "runs": runs,
        "best": {"run": best, "spearman": scored.get(best)} if best else None,
        "warnings": warnings,
    }
    dataio.write_report(report, args.out)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"gcd": cmd_gcd, "annotate": cmd_annotate, "layers": cmd_layers}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"lscd: configuration error: {exc}", file=sys.stderr)
        return 2
    except (LscdError, OSError) as exc:
        print(f"lscd: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
