"""Template corpus: predicate -> English template mappings.

The corpus is a UTF-8 TSV with `#` comment lines and columns

    key  template  answer_side  kind  [flags]

kind is one of single|cvt|union|restriction.  Keys are a dotted predicate
(single), `pred1|pred2` (cvt chain, in traversal order), or the sorted
`|`-joined multiset of all predicates inside a union block (union).
Restriction rows hold the mini-template pattern (one `<PH>` slot, usually a
parenthesization) keyed by the restriction predicate.  The optional flags
column is `;`-separated `k=v`: `wh=` overrides the interrogative prefix
(default `What is/are`), `pattern=` stores a union component blueprint whose
`<PH>` marks the asked-entity slots.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import UnknownPredicate

PH = "<PH>"
NUM = "<NUM>"
RSTR = "<RSTR>"

DEFAULT_WH = "What is/are"


@dataclass(frozen=True)
class TemplateEntry:
    key: str
    template: str
    answer_side: str  # 'subject' | 'object'
    kind: str  # 'single' | 'cvt' | 'union'
    wh: str = DEFAULT_WH
    pattern: str | None = None  # union blueprint

    def __post_init__(self):
        slots = self.template.count(PH) + self.template.count(NUM)
        if slots != 1:
            raise ValueError(f"{self.key}: template needs exactly one {PH}/{NUM} slot")
        if self.template.count(RSTR) > 1:
            raise ValueError(f"{self.key}: at most one {RSTR} slot")


@dataclass
class TemplateCorpus:
    entries: dict[str, TemplateEntry] = field(default_factory=dict)
    union_groups: dict[str, TemplateEntry] = field(default_factory=dict)
    mini: dict[str, str] = field(default_factory=dict)

    @property
    def cvt_pairs(self) -> set[tuple[str, str]]:
        return {
            tuple(k.split("|")) for k, e in self.entries.items() if e.kind == "cvt"
        }

    @property
    def restriction_preds(self) -> set[str]:
        return set(self.mini)

    def lookup(self, key: str) -> TemplateEntry:
        if key in self.entries:
            return self.entries[key]
        if key in self.union_groups:
            return self.union_groups[key]
        raise UnknownPredicate(key)

    def has(self, key: str) -> bool:
        return key in self.entries or key in self.union_groups

    def mini_template(self, pred: str) -> str:
        if pred not in self.mini:
            raise UnknownPredicate(pred)
        return self.mini[pred]

    def all_entries(self) -> list[TemplateEntry]:
        return list(self.entries.values()) + list(self.union_groups.values())

    def lint(self) -> list[str]:
        """Report keys whose template text collides with another entry; those
        cannot be uniquely inverted from rendered questions."""
        seen: dict[str, str] = {}
        issues = []
        for e in self.all_entries():
            norm = " ".join(self.strip_slots(e.template).split())
            if norm in seen:
                issues.append(f"template of {e.key} collides with {seen[norm]}")
            else:
                seen[norm] = e.key
        return issues

    @staticmethod
    def strip_slots(template: str) -> str:
        return template.replace(PH, "").replace(NUM, "").replace(RSTR, "")


def union_signature(predicates: list[str]) -> str:
    return "|".join(sorted(predicates))


def _parse_flags(raw: str) -> dict[str, str]:
    out = {}
    for part in raw.split(";"):
        part = part.strip()
        if not part:
            continue
        k, _, v = part.partition("=")
        out[k.strip()] = v.strip()
    return out


def load_corpus(path: str | Path) -> TemplateCorpus:
    corpus = TemplateCorpus()
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (4, 5):
            raise ValueError(f"{path}:{line_no}: expected 4 or 5 tab-separated columns")
        key, template, answer_side, kind = (c.strip() for c in cols[:4])
        flags = _parse_flags(cols[4]) if len(cols) == 5 else {}
        if kind == "restriction":
            corpus.mini[key] = template
            continue
        entry = TemplateEntry(
            key=key,
            template=template,
            answer_side=answer_side if answer_side in ("subject", "object") else "subject",
            kind=kind,
            wh=flags.get("wh", DEFAULT_WH),
            pattern=flags.get("pattern"),
        )
        if kind == "union":
            corpus.union_groups[key] = entry
        elif kind in ("single", "cvt"):
            corpus.entries[key] = entry
        else:
            raise ValueError(f"{path}:{line_no}: unknown kind {kind!r}")
    return corpus


def default_corpus_path() -> Path:
    return Path(__file__).parent / "data" / "corpus.tsv"


def load_default_corpus() -> TemplateCorpus:
    return load_corpus(default_corpus_path())
