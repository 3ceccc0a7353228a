"""Evaluation and data-cleaning metrics: exact match, answer F1, BLEU, ROUGE
with entity masking, n-gram diversity statistics, edit distance, NLL-difference
cleaning ranks and precision@K.

Tokenization everywhere: punctuation is detached, text lowercased, then split
on whitespace.  BLEU smoothing adds EPSILON to zeroed n-gram counts; ROUGE is
reported as an F-measure.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import ScorerFailure, UnlabeledItem
from .lf import LogicalForm, canonicalize, serialize
from .textdist import levenshtein  # noqa: F401  (re-exported)

EPSILON = 1e-9

_PUNCT_RE = re.compile(r'([.,!?;:"()])')
_ENTITY_TOKEN_RE = re.compile(r"#entity\d+#")


def tokenize(text: str) -> list[str]:
    return _PUNCT_RE.sub(r" \1 ", text).lower().split()


def ngrams(tokens: list[str], n: int) -> list[tuple]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


# ---------------------------------------------------------------------------
# exact match / F1


def exact_match(a: LogicalForm, b: LogicalForm) -> int:
    return int(serialize(canonicalize(a)) == serialize(canonicalize(b)))


def turn_em(outcomes: list[bool]) -> float:
    return sum(map(bool, outcomes)) / len(outcomes) if outcomes else 0.0


dialog_em = turn_em


def answer_f1(pred, gold) -> float:
    """Set-based F1 over answer values."""
    pred_set, gold_set = set(pred), set(gold)
    if not pred_set and not gold_set:
        return 1.0
    if not pred_set or not gold_set:
        return 0.0
    inter = len(pred_set & gold_set)
    if inter == 0:
        return 0.0
    p = inter / len(pred_set)
    r = inter / len(gold_set)
    return 2 * p * r / (p + r)


# ---------------------------------------------------------------------------
# BLEU / ROUGE


def corpus_bleu(candidates: list[str], references: list[str], n: int = 4) -> float:
    """Corpus BLEU with uniform weights up to n and brevity penalty; zeroed
    n-gram counts are floored at EPSILON."""
    if len(candidates) != len(references):
        raise ValueError("candidates and references must align")
    if not candidates:
        return 0.0
    cand_toks = [tokenize(c) for c in candidates]
    ref_toks = [tokenize(r) for r in references]
    log_sum = 0.0
    for k in range(1, n + 1):
        matched = 0
        total = 0
        for ct, rt in zip(cand_toks, ref_toks):
            c_counts = Counter(ngrams(ct, k))
            r_counts = Counter(ngrams(rt, k))
            matched += sum(min(v, r_counts[g]) for g, v in c_counts.items())
            total += sum(c_counts.values())
        p_k = (matched / total) if total else 0.0
        log_sum += math.log(p_k if p_k > 0 else EPSILON)
    c_len = sum(len(t) for t in cand_toks)
    r_len = sum(len(t) for t in ref_toks)
    bp = 1.0 if c_len > r_len or c_len == 0 else math.exp(1 - r_len / max(c_len, 1))
    if c_len == 0:
        return 0.0
    return bp * math.exp(log_sum / n)


def mask_entity_tokens(text: str, entities: tuple[str, ...] = ()) -> str:
    out = _ENTITY_TOKEN_RE.sub("#entity#", text)
    for surface in sorted(entities, key=len, reverse=True):
        if surface:
            out = out.replace(surface, "#entity#")
    return out


def rouge_n(candidate: str, reference: str, n: int = 1, mask_entities: bool = False,
            entities: tuple[str, ...] = ()) -> float:
    """n-gram overlap F-measure; optional normalization of entity mentions to
    a shared #entity# token before scoring."""
    if mask_entities:
        candidate = mask_entity_tokens(candidate, entities)
        reference = mask_entity_tokens(reference, entities)
    c_counts = Counter(ngrams(tokenize(candidate), n))
    r_counts = Counter(ngrams(tokenize(reference), n))
    matched = sum(min(v, r_counts[g]) for g, v in c_counts.items())
    c_total = sum(c_counts.values())
    r_total = sum(r_counts.values())
    if matched == 0 or not c_total or not r_total:
        return 0.0
    p = matched / c_total
    r = matched / r_total
    return 2 * p * r / (p + r)


# ---------------------------------------------------------------------------
# diversity


@dataclass
class NgramStats:
    n: int
    vocab_size: int
    distinct_ratio: float
    unique_count: int
    entropy_bits: float
    conditional_entropy_bits: float | None = None


@dataclass
class DiversityReport:
    per_n: dict = field(default_factory=dict)  # n -> NgramStats
    avg_length_words: float = 0.0

    def to_json(self) -> dict:
        return {
            "avg_length_words": self.avg_length_words,
            "ngrams": {
                str(n): {
                    "vocab_size": s.vocab_size,
                    "distinct_ratio": s.distinct_ratio,
                    "unique_count": s.unique_count,
                    "entropy_bits": s.entropy_bits,
                    "conditional_entropy_bits": s.conditional_entropy_bits,
                }
                for n, s in self.per_n.items()
            },
        }

    def table(self) -> str:
        rows = [("n", "vocab", "distinct", "unique", "entropy", "cond_entropy")]
        for n, s in sorted(self.per_n.items()):
            rows.append((
                str(n), str(s.vocab_size), f"{s.distinct_ratio:.3f}", str(s.unique_count),
                f"{s.entropy_bits:.3f}",
                "-" if s.conditional_entropy_bits is None else f"{s.conditional_entropy_bits:.3f}",
            ))
        rows.append(("avg_len", f"{self.avg_length_words:.1f}", "", "", "", ""))
        return format_table(rows)


def _entropy(counts: Counter) -> float:
    total = sum(counts.values())
    if total == 0:
        return 0.0
    h = 0.0
    for v in counts.values():
        p = v / total
        h -= p * math.log2(p)
    return h


def diversity_report(sentences: list[str], max_n: int = 3) -> DiversityReport:
    if not sentences:
        raise ValueError("empty corpus")
    token_lists = [tokenize(s) for s in sentences]
    report = DiversityReport(
        avg_length_words=sum(len(t) for t in token_lists) / len(token_lists))
    for n in range(1, max_n + 1):
        counts: Counter = Counter()
        for toks in token_lists:
            counts.update(ngrams(toks, n))
        total = sum(counts.values())
        entropy = _entropy(counts)
        cond = None
        if n >= 2:
            prefix_counts: Counter = Counter()
            for g, v in counts.items():
                prefix_counts[g[:-1]] += v
            cond = entropy - _entropy(prefix_counts)
        report.per_n[n] = NgramStats(
            n=n,
            vocab_size=len(counts),
            distinct_ratio=(len(counts) / total) if total else 0.0,
            unique_count=sum(1 for v in counts.values() if v == 1),
            entropy_bits=entropy,
            conditional_entropy_bits=cond,
        )
    return report


# ---------------------------------------------------------------------------
# data cleaning: NLL-difference and edit-distance ranking


class Scorer:
    """Token log-probability source; implementations must return one value
    (<= 0) per target token."""

    def token_logprobs(self, target_tokens: list[str], source_text: str) -> list[float]:
        raise NotImplementedError


class UnigramScorer(Scorer):
    """Corpus-frequency unigram model with Laplace smoothing; a deterministic
    stand-in for a trained seq2seq scorer."""

    def __init__(self, corpus: list[str]):
        self.counts: Counter = Counter()
        for text in corpus:
            self.counts.update(tokenize(text))
        self.total = sum(self.counts.values())
        self.vocab = max(len(self.counts), 1)

    def token_logprobs(self, target_tokens: list[str], source_text: str) -> list[float]:
        denom = self.total + self.vocab + 1
        return [math.log((self.counts[t] + 1) / denom) for t in target_tokens]


def sequence_score(scorer: Scorer, text: str, source: str) -> float:
    """Negative log-likelihood of the token sequence under the scorer."""
    return -sum(scorer.token_logprobs(tokenize(text), source))


@dataclass
class CleaningItem:
    id: str
    source: str
    target_mr: str
    generated_mr: str
    label: str | None = None  # 'accurate' | 'inaccurate'


@dataclass
class RankedItem:
    id: str
    d_score: float
    edit_distance: int
    label: str | None = None


def interleave(first: list, second: list, key=lambda x: x) -> list:
    """Alternate two rankings, deduplicating while preserving each ranking's
    internal order."""
    out = []
    seen = set()
    for a, b in zip(first, second):
        for item in (a, b):
            k = key(item)
            if k not in seen:
                seen.add(k)
                out.append(item)
    longer = first[len(second):] if len(first) > len(second) else second[len(first):]
    for item in longer:
        k = key(item)
        if k not in seen:
            seen.add(k)
            out.append(item)
    return out


def cleaning_rank(items: list[CleaningItem], scorer: Scorer) -> list[RankedItem]:
    """Rank paraphrase items for manual review: by |S(generated) - S(target)|
    descending and by edit distance descending, interleaved equally."""
    ranked: list[RankedItem] = []
    for item in items:
        try:
            s_target = sequence_score(scorer, item.target_mr, item.source)
            s_generated = sequence_score(scorer, item.generated_mr, item.source)
        except Exception as exc:
            raise ScorerFailure(item.id, exc) from exc
        ranked.append(RankedItem(
            id=item.id,
            d_score=abs(s_generated - s_target),
            edit_distance=levenshtein(item.target_mr, item.generated_mr),
            label=item.label,
        ))
    by_d = sorted(ranked, key=lambda r: -r.d_score)
    by_edit = sorted(ranked, key=lambda r: -r.edit_distance)
    return interleave(by_d, by_edit, key=lambda r: r.id)


def precision_at_k(ranked: list[RankedItem], k: int) -> float:
    """Fraction of the top-k items labeled inaccurate."""
    if k < 1 or k > len(ranked):
        raise ValueError(f"k must be in 1..{len(ranked)}")
    top = ranked[:k]
    if any(r.label not in ("accurate", "inaccurate") for r in top):
        raise UnlabeledItem("top-k items must carry accurate/inaccurate labels")
    return sum(1 for r in top if r.label == "inaccurate") / k


# ---------------------------------------------------------------------------
# report formatting


def format_table(rows: list[tuple]) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, ensure_ascii=False, default=str)
    if path is not None:
        from pathlib import Path

        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
