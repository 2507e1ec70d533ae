"""Planted synthetic datasets shared by the CLI tests and the acceptance
suite.

The measures dataset has six target words in two periods, C1 and C2. Each
period of each word is ten bitwise copies of one sense vector, which makes
every measure's planted value exact:

- three "shifted" words move to a new sense direction at decreasing angular
  separation (75, 67.5, 60 degrees), so APD, PRT and WiDiD must rank them
  strictly in that order while AP+JSD scores all three exactly 1.0;
- three "stable" words keep their vector, so all four measures score them
  exactly 0.0.

All coordinates stay strictly positive, which keeps the Canberra distance
well behaved. Human judgments are planted directly from the sense structure
(4.0 within a sense, 1.0 across senses), independent of the embeddings.

The annotation dataset is smaller (five usages per period per word) and
self-consistent: its "human" judgments are exactly the mapped cosine
similarities of its embeddings, so a computational annotator reproduces
them with Spearman 1.0, and its senses point in near-opposite directions so
mapped cross-sense judgments fall below the clustering threshold.
"""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np

from lscd.core import EmbeddingSet, Judgment, UsageInstance
from lscd.dataio import (
    GoldScore,
    write_embeddings,
    write_gold,
    write_gold_clusters,
    write_judgments,
    write_uses,
)
from lscd.geometry import cosine_distance

DIM = 8
BLOB = 10
PERIODS = ("C1", "C2")

# word -> (C1 sense angle, C2 sense angle, stable?)
MEASURE_WORDS = {
    "shift_large": (7.5, 82.5, False),
    "shift_mid": (7.5, 75.0, False),
    "shift_small": (7.5, 67.5, False),
    "stable_a": (30.0, 30.0, True),
    "stable_b": (45.0, 45.0, True),
    "stable_c": (60.0, 60.0, True),
}

CHANGED = ("shift_large", "shift_mid", "shift_small")
STABLE = ("stable_a", "stable_b", "stable_c")

# gold rank vectors tied exactly like the measures' planted score patterns:
# APD, PRT and WiDiD order the shifted words strictly and tie the stable
# ones at zero; AP+JSD ties the shifted words at 1 and the stable ones at 0
GOLD_FORM = {w: v for w, v in zip(CHANGED + STABLE, (6.0, 5.0, 4.0, 1.0, 1.0, 1.0))}
GOLD_JSD = {w: v for w, v in zip(CHANGED + STABLE, (2.0, 2.0, 2.0, 1.0, 1.0, 1.0))}


def sense_vector(angle_deg: float) -> np.ndarray:
    u1 = np.zeros(DIM)
    u1[: DIM // 2] = 0.5
    u2 = np.zeros(DIM)
    u2[DIM // 2 :] = 0.5
    t = math.radians(angle_deg)
    return math.cos(t) * u1 + math.sin(t) * u2


def _usage_id(word: str, period: str, i: int) -> str:
    return f"{word}-{period}-{i}"


def measure_embeddings() -> dict[tuple[str, str], EmbeddingSet]:
    """Embedding sets for the six measure-fixture words."""
    store: dict[tuple[str, str], EmbeddingSet] = {}
    for word, (a1, a2, _) in MEASURE_WORDS.items():
        for period, angle in (("C1", a1), ("C2", a2)):
            store[(word, period)] = EmbeddingSet.build(
                word,
                period,
                np.tile(sense_vector(angle), (BLOB, 1)),
                usage_ids=[_usage_id(word, period, i) for i in range(BLOB)],
                layer_spec="1",
            )
    return store


def measure_usages() -> list[UsageInstance]:
    out = []
    for word in MEASURE_WORDS:
        for period in PERIODS:
            for i in range(BLOB):
                context = f"an example with the word {word} inside"
                start = context.index(word)
                out.append(
                    UsageInstance(
                        usage_id=_usage_id(word, period, i),
                        lemma=word,
                        context=context,
                        target_start=start,
                        target_end=start + len(word),
                        period_id=period,
                    )
                )
    return out


def planted_sense(word: str, period: str) -> int:
    """Gold sense of a usage: shifted words switch senses with the period."""
    _, _, stable = MEASURE_WORDS[word]
    if stable:
        return 0
    return 0 if period == "C1" else 1


def measure_judgments() -> list[Judgment]:
    """Human judgments planted from the sense structure: 4 within, 1 across."""
    out = []
    for word in MEASURE_WORDS:
        uids = [
            (_usage_id(word, p, i), planted_sense(word, p))
            for p in PERIODS
            for i in range(BLOB)
        ]
        for (ua, sa), (ub, sb) in itertools.combinations(uids, 2):
            out.append(Judgment(ua, ub, "annotator1", 4.0 if sa == sb else 1.0))
    return out


def measure_gold_clusters() -> dict[str, dict[str, int]]:
    return {
        word: {
            _usage_id(word, p, i): planted_sense(word, p)
            for p in PERIODS
            for i in range(BLOB)
        }
        for word in MEASURE_WORDS
    }


def measure_gold_scores() -> list[GoldScore]:
    """Gold file for the command line runs, ordered like APD's exact scores."""
    return [GoldScore(lemma=w, graded=GOLD_FORM[w]) for w in sorted(MEASURE_WORDS)]


def write_measure_dataset(root: Path) -> dict[str, Path]:
    root = Path(root)
    store = measure_embeddings()
    paths = {
        "emb_dir": root / "embeddings",
        "uses": root / "uses.tsv",
        "judgments": root / "judgments.tsv",
        "gold": root / "gold.tsv",
        "gold_clusters": root / "gold_clusters.tsv",
    }
    write_embeddings(store, paths["emb_dir"], model="synthetic")
    write_uses(measure_usages(), paths["uses"])
    write_judgments(measure_judgments(), paths["judgments"])
    write_gold(measure_gold_scores(), paths["gold"])
    write_gold_clusters(measure_gold_clusters(), paths["gold_clusters"])
    return paths


def write_layer_dataset(root: Path, n_layers: int = 3) -> dict[str, Path]:
    """Per-layer embedding trees derived from the measure embeddings."""
    root = Path(root)
    base = measure_embeddings()
    emb_dir = root / "layers"
    for k in range(1, n_layers + 1):
        layer_store = {}
        for key, s in base.items():
            matrix = s.matrix * (1.0 + 0.25 * (k - 1))
            if k % 2 == 0:
                matrix = matrix[:, ::-1]
            layer_store[key] = EmbeddingSet.build(
                s.lemma, s.period_id, matrix, usage_ids=s.usage_ids, layer_spec=str(k)
            )
        write_embeddings(layer_store, emb_dir / str(k), model="synthetic")
    gold = root / "gold.tsv"
    write_gold(measure_gold_scores(), gold)
    return {"emb_dir": emb_dir, "gold": gold}


# ---------------------------------------------------------------------------
# annotation dataset (self-consistent judgments)
# ---------------------------------------------------------------------------

ANNOT_WORDS = {
    "jump": False,  # stable? no: changes sense between periods
    "drift": False,
    "calm": True,
}
ANNOT_BLOB = 5
ANNOT_DIM = 4


def _annot_sense(kind: int) -> np.ndarray:
    if kind == 0:
        return np.array([1.0, 0.2, 0.2, 0.2])
    return np.array([-1.0, -0.2, 0.2, 0.2])


def annot_embeddings(seed: int = 7) -> dict[tuple[str, str], EmbeddingSet]:
    rng = np.random.default_rng(seed)
    store: dict[tuple[str, str], EmbeddingSet] = {}
    for word, stable in ANNOT_WORDS.items():
        for period in PERIODS:
            sense = 0 if (stable or period == "C1") else 1
            mat = _annot_sense(sense) + rng.normal(0.0, 0.01, (ANNOT_BLOB, ANNOT_DIM))
            store[(word, period)] = EmbeddingSet.build(
                word,
                period,
                mat,
                usage_ids=[_usage_id(word, period, i) for i in range(ANNOT_BLOB)],
                layer_spec="1",
            )
    return store


def annot_usages() -> list[UsageInstance]:
    out = []
    for word in ANNOT_WORDS:
        for period in PERIODS:
            for i in range(ANNOT_BLOB):
                context = f"a sentence that mentions {word} plainly"
                start = context.index(word)
                out.append(
                    UsageInstance(
                        usage_id=_usage_id(word, period, i),
                        lemma=word,
                        context=context,
                        target_start=start,
                        target_end=start + len(word),
                        period_id=period,
                    )
                )
    return out


def annot_judgments(store: dict[tuple[str, str], EmbeddingSet]) -> list[Judgment]:
    """"Human" judgments equal to the linearly mapped cosine similarities."""
    out = []
    for word in ANNOT_WORDS:
        vectors: dict[str, np.ndarray] = {}
        for period in PERIODS:
            s = store[(word, period)]
            for i, uid in enumerate(s.usage_ids):
                vectors[uid] = s.matrix[i]
        for ua, ub in itertools.combinations(sorted(vectors), 2):
            sim = 1.0 - cosine_distance(vectors[ua], vectors[ub])
            value = 1.0 + 3.0 * (sim + 1.0) / 2.0
            out.append(Judgment(ua, ub, "annotator1", min(4.0, max(1.0, value))))
    return out


def annot_gold_clusters() -> dict[str, dict[str, int]]:
    out: dict[str, dict[str, int]] = {}
    for word, stable in ANNOT_WORDS.items():
        out[word] = {}
        for period in PERIODS:
            sense = 0 if (stable or period == "C1") else 1
            for i in range(ANNOT_BLOB):
                out[word][_usage_id(word, period, i)] = sense
    return out


def write_annot_dataset(root: Path, seed: int = 7) -> dict[str, Path]:
    root = Path(root)
    store = annot_embeddings(seed)
    paths = {
        "emb_dir": root / "embeddings",
        "uses": root / "uses.tsv",
        "judgments": root / "judgments.tsv",
        "gold": root / "gold.tsv",
        "gold_clusters": root / "gold_clusters.tsv",
    }
    write_embeddings(store, paths["emb_dir"], model="synthetic")
    write_uses(annot_usages(), paths["uses"])
    write_judgments(annot_judgments(store), paths["judgments"])
    gold = [
        GoldScore(lemma=w, graded=0.0 if stable else 1.0)
        for w, stable in sorted(ANNOT_WORDS.items())
    ]
    write_gold(gold, paths["gold"])
    write_gold_clusters(annot_gold_clusters(), paths["gold_clusters"])
    return paths
