"""Ingest CWQ-style JSON into the simulator's prediction/gold JSONL pair.

Input items carry `question`, `sparql`, `answers`, `compositionality_type`
and `entities` ([{surface, kb_id}] in logical-form order).  SPARQL text is
normalized into the header-token grammar, delexicalized against the entity
annotations, parsed and decomposed; items outside the supported subset or the
2-4 gold step range land in a rejects file with reasons, never aborting the
batch.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from ..corpus import TemplateCorpus
from ..decompose import decompose
from ..errors import SubquestError
from ..lf import HEADER_1, HEADER_2, delexicalize, parse_lf

_PREFIX_RE = re.compile(r"^\s*PREFIX\s+\S+\s+<[^>]*>\s*", re.IGNORECASE | re.MULTILINE)
_SELECT_RE = re.compile(r"SELECT\s+DISTINCT\s+\?\w+\s+WHERE\s*\{", re.IGNORECASE)
_ORDER_RE = re.compile(
    r"\}\s*ORDER\s+BY\s+(DESC\s*\(\s*)?(?:xsd:integer\s*\(\s*)?(\?\w+)\s*\)?\s*\)?\s*LIMIT\s+(\d+)\s*$",
    re.IGNORECASE,
)

GOLD_STEP_RANGE = (2, 4)


@dataclass
class IngestResult:
    gold_path: Path
    pred_path: Path
    rejects_path: Path
    accepted: int
    rejected: int


def normalize_sparql(text: str, qtype_hint: str = "") -> str:
    """Rewrite full-SPARQL text into the header-token surface form; text that
    already starts with a header token passes through."""
    text = text.strip()
    if text.startswith((HEADER_1, HEADER_2)):
        return re.sub(r"\s+", " ", text)
    text = _PREFIX_RE.sub("", text).strip()
    m = _SELECT_RE.search(text)
    if not m:
        raise ValueError("unsupported SPARQL shape: no SELECT DISTINCT ... WHERE {")
    body = text[m.end():].strip()
    sort_suffix = ""
    om = _ORDER_RE.search(body)
    if om:
        var, limit = om.group(2), om.group(3)
        direction = "desc ( " + var + " )" if om.group(1) else var
        sort_suffix = f" }} order by {direction} limit {limit}"
        body = body[: om.start()].strip()
    elif body.endswith("}"):
        body = body[:-1].strip()
    header = HEADER_1 if qtype_hint == "composition" else HEADER_2
    return re.sub(r"\s+", " ", f"{header} {body}{sort_suffix}")


def ingest_cwq(path: str | Path, out_dir: str | Path, corpus: TemplateCorpus) -> IngestResult:
    items = json.loads(Path(path).read_text(encoding="utf-8"))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gold_path = out / "gold.jsonl"
    pred_path = out / "pred.jsonl"
    rejects_path = out / "rejects.jsonl"
    accepted = rejected = 0
    with gold_path.open("w", encoding="utf-8") as gold_f, \
            pred_path.open("w", encoding="utf-8") as pred_f, \
            rejects_path.open("w", encoding="utf-8") as rej_f:
        for i, item in enumerate(items):
            item_id = str(item.get("ID", item.get("id", i)))
            try:
                record, pred_record = _convert(item, item_id, corpus)
            except (SubquestError, ValueError, KeyError) as exc:
                rejected += 1
                kind = getattr(exc, "kind", type(exc).__name__)
                rej_f.write(json.dumps(
                    {"id": item_id, "reason": f"{kind}: {exc}"}, ensure_ascii=False) + "\n")
                continue
            accepted += 1
            gold_f.write(json.dumps(record, ensure_ascii=False) + "\n")
            pred_f.write(json.dumps(pred_record, ensure_ascii=False) + "\n")
    return IngestResult(gold_path, pred_path, rejects_path, accepted, rejected)


def _convert(item: dict, item_id: str, corpus: TemplateCorpus) -> tuple[dict, dict]:
    qtype_hint = item.get("compositionality_type", "")
    entities = [(e["surface"], e["kb_id"]) for e in item.get("entities", [])]
    text = normalize_sparql(item["sparql"], qtype_hint)
    if entities and "#entity" not in text:
        text, emap = delexicalize(text, entities)
    else:
        from ..lf import EntityMap

        emap = EntityMap()
        for surface, kb_id in entities:
            emap.add(surface, kb_id)
    lf = parse_lf(text)
    d = decompose(lf, corpus)
    lo, hi = GOLD_STEP_RANGE
    if not lo <= d.step_count() <= hi:
        raise ValueError(f"gold decomposition has {d.step_count()} steps, outside {lo}-{hi}")
    record = {
        "id": item_id,
        "lf": text,
        "question": item.get("question", ""),
        "entities": emap.to_json(),
        "answers": item.get("answers", []),
    }
    pred_record = dict(record)
    if item.get("predicted_sparql"):
        pred_text = normalize_sparql(item["predicted_sparql"], qtype_hint)
        if entities and "#entity" not in pred_text:
            pred_text, _ = delexicalize(pred_text, [
                (s, k) for s, k in entities if re.search(r"(?<![\w.])(?:ns:)?" + re.escape(k) + r"(?![\w.])", pred_text)
            ])
        parse_lf(pred_text)  # must at least parse; decompose may legitimately differ
        pred_record = {**record, "lf": pred_text}
    return record, pred_record
