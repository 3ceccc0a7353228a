"""Invert templated sub-questions back into sub-LF components.

This is the deterministic counterpart of the renderer: it strips the
question-type prefix, pattern-matches the body against every corpus template
(longest literal match first) and reconstructs a component consistent with
the dialogue context.  Ambiguity is expressed through ranking, not errors;
`NoTemplateMatch` is raised only when nothing matches at all.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import NUM, PH, RSTR, TemplateCorpus, TemplateEntry, DEFAULT_WH
from .decompose import Component
from .errors import NoTemplateMatch
from .lf import Comparison, EntityMap, NotEqual, NotExists, Term, Triple, UnionBlock, _Parser, _tokenize
from .render import SORT_SENTENCES


@dataclass(frozen=True)
class SortIntent:
    """A corrected sort sentence: direction plus value kind."""

    descending: bool
    kind: str  # 'date' | 'number'


@dataclass(frozen=True)
class InvertContext:
    qtype: str
    step_index: int  # 0-based position of the step being produced
    upstream_var: Term | None = None
    entity_map: EntityMap | None = None


_CMP_RE = re.compile(r"^(greater|less) than (-?\d+(?:\.\d+)?)$")


def _wh_prefixes(corpus: TemplateCorpus) -> list[str]:
    whs = {DEFAULT_WH}
    whs.update(e.wh for e in corpus.all_entries())
    return sorted(whs, key=len, reverse=True)


def _lower_first(s: str) -> str:
    return s[0].lower() + s[1:] if s else s


_SLOT_SENTINEL = "\x00P\x00"
_RSTR_SENTINEL = "\x00R\x00"


def _template_regexes(entry: TemplateEntry) -> list[tuple[re.Pattern, bool]]:
    """(pattern, captures_restriction) variants; restriction-capturing variant
    first so structured matches outrank slurping the phrase into the slot."""
    variants: list[tuple[str, bool]]
    if RSTR in entry.template:
        variants = [
            (entry.template.replace(RSTR, _RSTR_SENTINEL), True),
            (" ".join(entry.template.replace(RSTR, " ").split()), False),
        ]
    else:
        variants = [(entry.template, False)]
    out = []
    for text, has_rstr in variants:
        slotted = text.replace(PH, _SLOT_SENTINEL).replace(NUM, _SLOT_SENTINEL)
        pat = re.escape(slotted).replace(re.escape(_SLOT_SENTINEL), r"(?P<ph>.+?)")
        if has_rstr:
            pat = pat.replace(re.escape(_RSTR_SENTINEL), r"(?P<rstr>\S.*?)")
        out.append((re.compile("^" + pat + "$"), has_rstr))
    return out


def _specificity(entry: TemplateEntry) -> int:
    return len(TemplateCorpus.strip_slots(entry.template).strip())


def _parse_statements(text: str) -> list:
    p = _Parser(_tokenize(text))
    stmts = p.statements(stop=())
    if p.peek() is not None:
        raise NoTemplateMatch(text)
    return stmts


def _renumber_entities(stmts: list, emap: EntityMap) -> list:
    """Reassign placeholder indices over a reconstructed statement sequence:
    each grounded occurrence consumes the next unused entity-map index bound
    to the same KB id, in textual order.  This reproduces the occurrence-order
    numbering the original delexicalization used; inline constants that match
    a mapped entity become placeholders again."""
    pools: dict[str, list[int]] = {}
    for idx in sorted(emap.entries):
        pools.setdefault(emap.entries[idx].kb_id, []).append(idx)

    def take(kb_id: str) -> int | None:
        pool = pools.get(kb_id)
        return pool.pop(0) if pool else None

    def sub(t: Term) -> Term:
        if t.kind == "entity" and t.value in emap.entries:
            idx = take(emap.kb_id(t.value))
            return Term.entity(idx) if idx is not None else t
        if t.kind == "const" and t.value != "[]":
            idx = take(t.value)
            return Term.entity(idx) if idx is not None else t
        return t

    def rewrite(s):
        if isinstance(s, Triple):
            return Triple(sub(s.subject), s.predicate, sub(s.object))
        if isinstance(s, Comparison):
            return s
        if isinstance(s, NotEqual):
            return NotEqual(s.var, sub(s.term))
        if isinstance(s, NotExists):
            return NotExists(tuple(rewrite(x) for x in s.statements))
        if isinstance(s, UnionBlock):
            return UnionBlock(tuple(tuple(rewrite(x) for x in b) for b in s.branches), s.labels)
        raise TypeError(type(s))

    return [rewrite(s) for s in stmts]


def _build_union(entry: TemplateEntry, ph_term: Term, emap: EntityMap | None) -> Component | None:
    if not entry.pattern:
        return None
    text = entry.pattern.replace(PH, ph_term.text())
    stmts = _parse_statements(text)
    if emap is not None:
        stmts = _renumber_entities(stmts, emap)
    blocks = [s for s in stmts if isinstance(s, UnionBlock)]
    filters = tuple(s for s in stmts if isinstance(s, (Comparison, NotEqual, NotExists)))
    if len(blocks) != 1:
        return None
    from .decompose import _shared_block_var

    grounded = None
    for b in blocks[0].branches:
        for s in b:
            if isinstance(s, Triple):
                for t in s.terms():
                    if t.kind in ("entity", "const") and grounded is None:
                        grounded = t
    return Component(
        kind="union",
        block=blocks[0],
        filters=filters,
        input_term=grounded if grounded is not None else ph_term,
        output_var=Term.var(_shared_block_var(blocks[0])),
    )


def _invert_restriction(phrase: str, subject: Term, corpus: TemplateCorpus,
                        emap: EntityMap) -> Triple | None:
    minis = sorted(corpus.mini.items(), key=lambda kv: len(kv[1]), reverse=True)
    for pred, pattern in minis:
        rx = re.compile("^" + re.escape(pattern).replace(re.escape(PH), r"(.+?)") + "$")
        m = rx.match(phrase)
        if not m:
            continue
        idx = emap.index_of_surface(m.group(1)) if emap else None
        if idx is None:
            continue
        return Triple(subject, pred, Term.entity(idx))
    return None


def _strip_prefix(text: str, ctx: InvertContext, corpus: TemplateCorpus):
    """Returns (mode, described_term_or_None, wh_used, body)."""
    emap = ctx.entity_map or EntityMap()
    rest = text.strip()
    if not rest.endswith("?"):
        raise NoTemplateMatch(text)
    rest = rest[:-1].strip()
    if rest.startswith("Of which, "):
        rest = rest[len("Of which, "):]

    if rest.startswith("These entities are "):
        return "name_upstream_numeric", None, None, rest[len("These entities are "):]
    for lead in ("That entity is/are ", "that entity is/are "):
        if rest.startswith(lead):
            return "name_upstream", None, None, rest[len(lead):]
    for wh in _wh_prefixes(corpus):
        for variant in (wh + " ", _lower_first(wh) + " "):
            if rest.startswith(variant):
                return "ask", None, wh, rest[len(variant):]
    for surface in sorted(set(emap.surfaces()), key=len, reverse=True):
        lead = surface + " is/are "
        if rest.startswith(lead):
            idx = emap.index_of_surface(surface)
            return "name_entity", Term.entity(idx), None, rest[len(lead):]
    raise NoTemplateMatch(text)


def invert(text: str, ctx: InvertContext, corpus: TemplateCorpus) -> list:
    """Ranked candidate components (or SortIntent) for a templated question."""
    for (direction, kind), sentence in SORT_SENTENCES.items():
        if text.strip() == sentence:
            return [SortIntent(direction == "descending", kind)]

    mode, d_term, wh_used, body = _strip_prefix(text, ctx, corpus)
    emap = ctx.entity_map or EntityMap()
    upstream = ctx.upstream_var
    candidates: list[tuple[tuple, Component]] = []

    for entry in corpus.all_entries():
        if mode == "ask" and entry.wh != wh_used:
            continue
        if mode != "ask" and entry.wh != DEFAULT_WH:
            continue
        for rx, captures_rstr in _template_regexes(entry):
            m = rx.match(body)
            if not m:
                continue
            comp = _interpret(entry, m, mode, d_term, upstream, emap, corpus, ctx)
            if comp is None:
                continue
            rank = (-_specificity(entry), 0 if captures_rstr else 1, entry.key)
            candidates.append((rank, comp))
            break

    if not candidates:
        raise NoTemplateMatch(text)
    candidates.sort(key=lambda rc: rc[0])
    return [c for _, c in candidates]


def _interpret(entry: TemplateEntry, m: re.Match, mode: str, d_term: Term | None,
               upstream: Term | None, emap: EntityMap, corpus: TemplateCorpus,
               ctx: InvertContext) -> Component | None:
    fill = m.group("ph").strip()
    rstr_phrase = m.groupdict().get("rstr")
    cmp_m = _CMP_RE.match(fill)

    numeric = None
    filters: tuple = ()
    if mode == "ask":
        # the described end is asked for
        d = upstream if (upstream is not None and ctx.step_index > 0
                         and ctx.qtype in ("conjunction", "comparative")) else Term.var("x")
        if cmp_m:
            numeric = Term.var("num")
            op = ">" if cmp_m.group(1) == "greater" else "<"
            value = float(cmp_m.group(2)) if "." in cmp_m.group(2) else int(cmp_m.group(2))
            filters = (Comparison(numeric, op, value),)
            p = numeric
            inp, out = (upstream, upstream) if upstream is not None else (d, d)
            d = upstream if upstream is not None else d
        elif fill == "that entity":
            if upstream is None:
                return None
            p = upstream
            inp, out = p, d
        else:
            idx = emap.index_of_surface(fill)
            if idx is None:
                return None
            p = Term.entity(idx)
            inp, out = p, d
    elif mode in ("name_upstream", "name_upstream_numeric", "name_entity"):
        if fill != "what":
            return None
        d = d_term if mode == "name_entity" else upstream
        if d is None:
            return None
        if mode == "name_upstream_numeric" or NUM in entry.template:
            numeric = Term.var("num")
            p = numeric
            inp, out = (d, d) if d.kind == "var" else (d, numeric)
        else:
            p = Term.var("x2" if d.kind == "var" and d.value == "x" else "x")
            inp, out = d, p
    else:
        return None

    if entry.kind == "union":
        if p.kind not in ("entity", "const"):
            return None
        return _build_union(entry, p, emap)

    subj, obj = (d, p) if entry.answer_side != "object" else (p, d)
    if entry.kind == "cvt":
        p1, p2 = entry.key.split("|")
        conn = Term.var("cv")
        triples = (Triple(subj, p1, conn), Triple(conn, p2, obj))
    else:
        triples = (Triple(subj, entry.key, obj),)

    restriction = None
    if rstr_phrase:
        # restrictions constrain a variable end; prefer the slot end
        target = p if p.kind == "var" else (d if d.kind == "var" else None)
        if target is None:
            return None
        restriction = _invert_restriction(rstr_phrase.strip(), target, corpus, emap)
        if restriction is None:
            return None

    return Component(
        kind=entry.kind,
        triples=triples,
        restriction=restriction,
        filters=filters,
        input_term=inp,
        output_var=out,
        numeric_var=numeric,
    )
