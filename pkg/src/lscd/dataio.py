"""Reading and writing the on-disk formats.

All files are tab-separated UTF-8 text:

- uses: header row with at least ``lemma  identifier  context
  indexes_target_token  grouping``; the target span is ``start:end``
  character offsets into ``context``; unknown columns are ignored.
- judgments: header ``identifier1  identifier2  annotator  judgment``;
  judgment values are reals in [1, 4]; the value 0 marks "cannot decide" and
  is skipped (counted).
- embeddings: one file per (lemma, period) at ``<dir>/<lemma>/<period>.emb``
  (``.emb.gz`` accepted transparently); line 1 is
  ``#dim=<d>\\tcount=<n>\\tlayer=<spec>\\tmodel=<name>``, then one
  ``usage_id\\t<d space-separated floats>`` row per usage. Multi-layer trees
  nest this layout under one directory per layer index.
- gold scores: ``lemma\\tgraded_score`` rows (optional canonical header).
- gold sense clusters: header ``lemma  identifier  cluster``.
- reports: a single JSON document with sorted keys, so identical runs are
  byte-identical.
"""

from __future__ import annotations

import csv
import gzip
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import DomainError, EmbeddingSet, Judgment, SchemaError, UsageInstance


@dataclass(frozen=True)
class GoldScore:
    """Benchmark ground-truth graded change score for one target."""

    lemma: str
    graded: float
    period_pair: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.graded):
            raise DomainError(f"gold score for {self.lemma!r} must be finite")

USES_COLUMNS = ("lemma", "identifier", "context", "indexes_target_token", "grouping")
JUDGMENT_COLUMNS = ("identifier1", "identifier2", "annotator", "judgment")
GOLD_HEADER = "lemma\tgraded_score"
CLUSTER_COLUMNS = ("lemma", "identifier", "cluster")


def _open_text(path: Path, mode: str = "rt"):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode, encoding="utf-8")
    return open(path, mode, encoding="utf-8", newline="" if "r" in mode else None)


def _dict_reader(handle, required: Sequence[str], aliases: Mapping[str, str], where: str):
    reader = csv.DictReader(handle, delimiter="\t", quoting=csv.QUOTE_NONE)
    if reader.fieldnames is None:
        raise SchemaError(f"{where}: empty file")
    for canonical in required:
        actual = aliases.get(canonical, canonical)
        if actual not in reader.fieldnames:
            raise SchemaError(f"{where}: missing column {actual!r}")
    return reader


def load_uses(
    path: str | Path, aliases: Mapping[str, str] | None = None
) -> list[UsageInstance]:
    """Parse a uses file. ``aliases`` maps canonical column names to the
    names actually present (benchmark releases vary)."""
    path = Path(path)
    aliases = dict(aliases or {})
    out: list[UsageInstance] = []
    with _open_text(path) as handle:
        reader = _dict_reader(handle, USES_COLUMNS, aliases, str(path))
        col = {c: aliases.get(c, c) for c in USES_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            raw_span = (row[col["indexes_target_token"]] or "").strip()
            try:
                start_s, _, end_s = raw_span.partition(":")
                start, end = int(start_s), int(end_s)
            except ValueError as exc:
                raise SchemaError(
                    f"{path}:{lineno}: cannot parse target offsets {raw_span!r}"
                ) from exc
            context = row[col["context"]]
            if not 0 <= start < end <= len(context):
                raise SchemaError(
                    f"{path}:{lineno}: offsets {start}:{end} out of bounds for "
                    f"context of length {len(context)}"
                )
            out.append(
                UsageInstance(
                    usage_id=row[col["identifier"]],
                    lemma=row[col["lemma"]],
                    context=context,
                    target_start=start,
                    target_end=end,
                    period_id=row[col["grouping"]],
                )
            )
    return out


def write_uses(usages: Iterable[UsageInstance], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(USES_COLUMNS) + "\n")
        for u in usages:
            handle.write(
                f"{u.lemma}\t{u.usage_id}\t{u.context}\t"
                f"{u.target_start}:{u.target_end}\t{u.period_id}\n"
            )


def load_judgments(
    path: str | Path, aliases: Mapping[str, str] | None = None
) -> tuple[list[Judgment], int]:
    """Parse a judgments file; returns (judgments, skipped_zero_count).

    The DWUG "cannot decide" marker 0 is dropped and counted; anything else
    outside [1, 4] is an error.
    """
    path = Path(path)
    aliases = dict(aliases or {})
    judgments: list[Judgment] = []
    skipped = 0
    with _open_text(path) as handle:
        reader = _dict_reader(handle, JUDGMENT_COLUMNS, aliases, str(path))
        col = {c: aliases.get(c, c) for c in JUDGMENT_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            raw = (row[col["judgment"]] or "").strip()
            try:
                value = float(raw)
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: non-numeric judgment {raw!r}") from exc
            if value == 0.0:
                skipped += 1
                continue
            if not 1.0 <= value <= 4.0:
                raise SchemaError(
                    f"{path}:{lineno}: judgment {value} outside {{0}} and [1, 4]"
                )
            judgments.append(
                Judgment(
                    usage_id_1=row[col["identifier1"]],
                    usage_id_2=row[col["identifier2"]],
                    annotator=row[col["annotator"]],
                    value=value,
                )
            )
    return judgments, skipped


def write_judgments(judgments: Iterable[Judgment], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(JUDGMENT_COLUMNS) + "\n")
        for j in judgments:
            handle.write(f"{j.usage_id_1}\t{j.usage_id_2}\t{j.annotator}\t{j.value!r}\n")


def _parse_emb_header(line: str, where: str) -> dict[str, str]:
    if not line.startswith("#"):
        raise SchemaError(f"{where}: missing '#' header line")
    fields: dict[str, str] = {}
    for token in line[1:].rstrip("\n").split("\t"):
        key, sep, value = token.partition("=")
        if not sep:
            raise SchemaError(f"{where}: malformed header token {token!r}")
        fields[key] = value
    for key in ("dim", "count", "layer"):
        if key not in fields:
            raise SchemaError(f"{where}: header lacks {key!r}")
    return fields


def read_embedding_file(path: str | Path, lemma: str, period_id: str) -> EmbeddingSet:
    path = Path(path)
    where = str(path)
    with _open_text(path) as handle:
        header = _parse_emb_header(handle.readline(), where)
        try:
            dim = int(header["dim"])
            count = int(header["count"])
        except ValueError as exc:
            raise SchemaError(f"{where}: non-integer dim/count in header") from exc
        ids: list[str] = []
        rows: list[np.ndarray] = []
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            uid, sep, payload = line.partition("\t")
            if not sep:
                raise SchemaError(f"{where}:{lineno}: expected 'usage_id<TAB>floats'")
            try:
                vec = np.array([float(t) for t in payload.split()], dtype=np.float64)
            except ValueError as exc:
                raise SchemaError(f"{where}:{lineno}: unparseable float") from exc
            if vec.size != dim:
                raise SchemaError(
                    f"{where}:{lineno}: row has {vec.size} values, header says dim={dim}"
                )
            if not np.isfinite(vec).all():
                raise SchemaError(f"{where}:{lineno}: non-finite component")
            ids.append(uid)
            rows.append(vec)
    if len(rows) != count:
        raise SchemaError(f"{where}: header says count={count} but {len(rows)} rows found")
    if len(set(ids)) != len(ids):
        raise SchemaError(f"{where}: duplicate usage ids")
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingSet.build(
        lemma=lemma,
        period_id=period_id,
        vectors=matrix,
        usage_ids=ids,
        layer_spec=header["layer"],
    )


def load_embeddings(directory: str | Path) -> dict[tuple[str, str], EmbeddingSet]:
    """Load every ``<dir>/<lemma>/<period>.emb[.gz]`` file."""
    directory = Path(directory)
    if not directory.is_dir():
        raise SchemaError(f"{directory}: not a directory")
    store: dict[tuple[str, str], EmbeddingSet] = {}
    for lemma_dir in sorted(p for p in directory.iterdir() if p.is_dir()):
        for f in sorted(lemma_dir.iterdir()):
            name = f.name
            if name.endswith(".emb.gz"):
                period = name[: -len(".emb.gz")]
            elif name.endswith(".emb"):
                period = name[: -len(".emb")]
            else:
                continue
            key = (lemma_dir.name, period)
            if key in store:
                raise SchemaError(f"{f}: duplicate embeddings for {key}")
            store[key] = read_embedding_file(f, lemma_dir.name, period)
    return store


def format_float(x: float, digits: int | None = None) -> str:
    if digits is None:
        return repr(float(x))
    return f"{float(x):.{digits}g}"


def write_embedding_file(
    s: EmbeddingSet,
    path: str | Path,
    model: str = "unknown",
    digits: int | None = None,
) -> None:
    """Write one embedding set; ``digits=None`` keeps full (round-trip)
    precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"#dim={s.dim}\tcount={s.n}\tlayer={s.layer_spec}\tmodel={model}\n")
    matrix = s.matrix
    for uid, row in zip(s.usage_ids, matrix):
        payload = " ".join(format_float(v, digits) for v in row.tolist())
        buf.write(f"{uid}\t{payload}\n")
    data = buf.getvalue()
    if str(path).endswith(".gz"):
        with gzip.open(path, "wt", encoding="utf-8") as handle:
            handle.write(data)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(data)


def write_embeddings(
    store: Mapping[tuple[str, str], EmbeddingSet],
    directory: str | Path,
    model: str = "unknown",
    digits: int | None = None,
) -> None:
    directory = Path(directory)
    for (lemma, period), s in sorted(store.items()):
        write_embedding_file(s, directory / lemma / f"{period}.emb", model, digits)


def load_gold(path: str | Path) -> list[GoldScore]:
    """Parse ``lemma<TAB>score`` rows; duplicate lemmas are an error."""
    path = Path(path)
    out: list[GoldScore] = []
    seen: set[str] = set()
    with _open_text(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if lineno == 1 and line == GOLD_HEADER:
                continue
            lemma, sep, raw = line.partition("\t")
            if not sep:
                raise SchemaError(f"{path}:{lineno}: expected 'lemma<TAB>score'")
            try:
                score = float(raw)
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: non-numeric score {raw!r}") from exc
            if not math.isfinite(score):
                raise SchemaError(f"{path}:{lineno}: score must be finite")
            if lemma in seen:
                raise SchemaError(f"{path}:{lineno}: duplicate lemma {lemma!r}")
            seen.add(lemma)
            out.append(GoldScore(lemma=lemma, graded=score))
    return out


def write_gold(scores: Iterable[GoldScore], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(GOLD_HEADER + "\n")
        for g in scores:
            handle.write(f"{g.lemma}\t{g.graded!r}\n")


def load_gold_clusters(path: str | Path) -> dict[str, dict[str, int]]:
    """Gold sense assignments per lemma; labels densified to ints."""
    path = Path(path)
    raw: dict[str, dict[str, str]] = {}
    with _open_text(path) as handle:
        reader = _dict_reader(handle, CLUSTER_COLUMNS, {}, str(path))
        for lineno, row in enumerate(reader, start=2):
            lemma = row["lemma"]
            uid = row["identifier"]
            if uid in raw.get(lemma, {}):
                raise SchemaError(f"{path}:{lineno}: duplicate assignment for {uid!r}")
            raw.setdefault(lemma, {})[uid] = row["cluster"]
    out: dict[str, dict[str, int]] = {}
    for lemma, assignment in raw.items():
        mapping: dict[str, int] = {}
        dense: dict[str, int] = {}
        for uid in sorted(assignment):
            label = assignment[uid]
            mapping.setdefault(label, len(mapping))
            dense[uid] = mapping[label]
        out[lemma] = dense
    return out


def write_gold_clusters(
    clusters: Mapping[str, Mapping[str, object]], path: str | Path
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(CLUSTER_COLUMNS) + "\n")
        for lemma in sorted(clusters):
            for uid in sorted(clusters[lemma]):
                handle.write(f"{lemma}\t{uid}\t{clusters[lemma][uid]}\n")


def _jsonable(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def write_report(report: Mapping, path: str | Path) -> None:
    """Serialize a report as JSON with sorted keys (byte-stable given equal
    content)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text + "\n")


def load_report(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
