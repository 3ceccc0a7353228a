"""Render sub-LF components into templated English sub-questions.

Rendering composes three pieces: the corpus template with its `<PH>`/`<NUM>`
slot filled, a resolved (or deleted) `<RSTR>` restriction phrase, and a
question-type prefix.  The slot fill and prefix depend on where the
component's grounded/upstream input sits relative to the end the template
describes:

  input at the far (slot) end   -> "What is/are <template, slot=entity>?"
  input at the described end    -> "<entity> is/are <template, slot=what>?"
  upstream input, chained step  -> "That entity is/are ... what?"
  intersecting steps            -> prefixed with "Of which, "
  numeric pairing step          -> "These entities are ... what?"
  comparison filter on the slot -> slot filled with "greater than N" / "less than N"

A superlative decomposition ends with a fixed sort sentence selected by sort
direction and the value kind of the numeric predicate.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import NUM, PH, RSTR, TemplateCorpus, TemplateEntry
from .decompose import COMPARATIVE, CONJUNCTION, SUPERLATIVE, Component, Decomposition
from .errors import MissingEntity
from .lf import EntityMap, SortClause, Term, format_number


@dataclass(frozen=True)
class TemplatedQuestion:
    text: str
    step_index: int  # 1-based display index
    fills: dict = field(default_factory=dict, compare=False)


SORT_SENTENCES = {
    ("ascending", "date"): "Of these, which is the entity associated with the earliest date?",
    ("descending", "date"): "Of these, which is the entity associated with the latest date?",
    ("ascending", "number"): "Of these, which is the entity associated with the smallest value?",
    ("descending", "number"): "Of these, which is the entity associated with the largest value?",
}

_DATE_SUFFIXES = {"career_start"}


def value_kind(predicate: str) -> str:
    seg = predicate.rsplit(".", 1)[-1]
    if "date" in seg or seg in _DATE_SUFFIXES:
        return "date"
    return "number"


def _normalize_spaces(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def _surface(term: Term, emap: EntityMap) -> str:
    if term.kind == "entity":
        return emap.surface(term.value)
    if term.kind == "const":
        return str(term.value)
    if term.kind == "literal":
        return format_number(term.value) if not isinstance(term.value, str) else term.value
    raise MissingEntity(0)


def _fill_slot(template: str, value: str) -> str:
    # <PH> and <NUM> are interchangeable at fill time; entries carry one slot.
    return template.replace(PH, value).replace(NUM, value)


def _resolve_restriction(template: str, comp: Component, emap: EntityMap,
                         corpus: TemplateCorpus, fills: dict) -> str:
    if RSTR not in template:
        return template
    if comp.restriction is None:
        return _normalize_spaces(template.replace(RSTR, ""))
    mini = corpus.mini_template(comp.restriction.predicate)
    entity = comp.restriction.object
    phrase = _fill_slot(mini, _surface(entity, emap))
    fills["RSTR"] = phrase
    return _normalize_spaces(template.replace(RSTR, phrase))


def _lower_first(s: str) -> str:
    return s[0].lower() + s[1:] if s else s


def _oriented_ends(comp: Component, entry: TemplateEntry) -> tuple[Term, Term]:
    """(described end, slot end) honoring the entry's answer_side."""
    d_end, f_end = comp.ends()
    if entry.kind != "union" and entry.answer_side == "object":
        return f_end, d_end
    return d_end, f_end


def render_component(comp: Component, qtype: str, position: int, emap: EntityMap,
                     corpus: TemplateCorpus) -> tuple[str, dict]:
    """Build the sub-question text for one component.  `position` is the
    0-based step position, which selects first-step vs downstream prefixes."""
    entry = corpus.lookup(comp.corpus_key())
    fills: dict = {}
    template = _resolve_restriction(entry.template, comp, emap, corpus, fills)

    d_end, p_end = _oriented_ends(comp, entry)
    cmp_f = comp.comparison()
    downstream_join = qtype in (CONJUNCTION, COMPARATIVE) and position > 0

    if cmp_f is not None and p_end.kind == "var" and p_end.value == cmp_f.var.value:
        word = "greater than" if cmp_f.op == ">" else "less than"
        fill = f"{word} {format_number(cmp_f.value)}"
        mode = "ask"
    elif p_end.is_grounded:
        fill = _surface(p_end, emap)
        mode = "ask"
    elif comp.input_term is not None and p_end == comp.input_term:
        fill = "that entity"
        mode = "ask"
    else:
        fill = "what"
        mode = "name"
    fills["PH"] = fill
    body = _fill_slot(template, fill)

    if mode == "ask":
        wh = entry.wh
        prefix = f"Of which, {_lower_first(wh)} " if downstream_join else f"{wh} "
    else:
        if d_end.is_grounded:
            subject = f"{_surface(d_end, emap)} is/are "
        elif (qtype == SUPERLATIVE and comp.numeric_var is not None
                and p_end.kind == "var" and p_end.value == comp.numeric_var.value):
            subject = "These entities are "
        else:
            subject = "That entity is/are "
        prefix = f"Of which, {_lower_first(subject)}" if downstream_join else subject

    text = _normalize_spaces(prefix + body) + "?"
    return text, fills


def render_sort_step(sort: SortClause, d: Decomposition) -> str:
    direction = "descending" if sort.descending else "ascending"
    kind = "number"
    for c in d.components:
        if c.numeric_var is not None and c.numeric_var.value == sort.var.value and c.triples:
            kind = value_kind(c.triples[-1].predicate)
            break
    return SORT_SENTENCES[(direction, kind)]


def render_step(d: Decomposition, i: int, emap: EntityMap, corpus: TemplateCorpus) -> TemplatedQuestion:
    """Render the i-th step (0-based); the sort sentence is the final step of
    a superlative decomposition."""
    n = len(d.components)
    if not 0 <= i < d.step_count():
        raise IndexError(i)
    if i == n and d.sort_step is not None:
        return TemplatedQuestion(render_sort_step(d.sort_step, d), i + 1, {})
    text, fills = render_component(d.components[i], d.qtype, i, emap, corpus)
    return TemplatedQuestion(text, i + 1, fills)


def render_all(d: Decomposition, emap: EntityMap, corpus: TemplateCorpus) -> list[TemplatedQuestion]:
    return [render_step(d, i, emap, corpus) for i in range(d.step_count())]
