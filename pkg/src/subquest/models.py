"""Correction models and feedback generators.

The oracle model resolves a feedback question by matching it against the
rendered gold steps, which bounds achievable accuracy at 1 and makes the
simulation deterministic.  The template-inverse model reconstructs components
purely from the question text via the corpus templates and is what a live
session without gold annotations uses.  Remote HTTP-backed implementations
live in the gateway package.
"""
from __future__ import annotations

from .corpus import TemplateCorpus
from .correct import CorrectionModel, DialogueState, diff_components, render_op
from .decompose import Decomposition, component_signature
from .errors import NoTemplateMatch
from .invert import InvertContext, SortIntent, invert
from .lf import EntityMap, Term
from .render import render_component, render_sort_step

_UPSTREAM_LEADS = ("That entity", "These entities", "Of which,", "that entity")


class TemplateInverseModel(CorrectionModel):
    """Deterministic stand-in for a trained correction model: candidates come
    from template inversion, ranked by match specificity.  Several upstream
    bindings are tried for questions whose prefix references earlier steps."""

    def __init__(self, corpus: TemplateCorpus):
        self.corpus = corpus

    def _contexts(self, question: str, state: DialogueState, position: int | None):
        outputs: list[Term] = []
        for s in state.steps:
            c = s.component
            if c is not None and c.output_var is not None and c.output_var.kind == "var":
                if all(c.output_var.value != t.value for t in outputs):
                    outputs.append(c.output_var)
        upstream_first = question.strip().startswith(_UPSTREAM_LEADS)
        candidates: list[Term | None] = []
        if position is not None and 0 <= position - 1 < len(state.steps):
            prev = state.steps[position - 1].component
            if prev is not None and prev.output_var is not None and prev.output_var.kind == "var":
                candidates.append(prev.output_var)
        if position is not None and position < len(state.steps):
            cur = state.steps[position].component
            if cur is not None:
                if cur.input_term is not None and cur.input_term.kind == "var":
                    candidates.append(cur.input_term)
                if cur.output_var is not None and cur.output_var.kind == "var":
                    candidates.append(cur.output_var)
        if upstream_first:
            candidates.extend(reversed(outputs))
        else:
            candidates.append(None)
            candidates.extend(reversed(outputs))
        seen = set()
        ordered = []
        for t in candidates:
            key = t.value if t is not None else None
            if key in seen:
                continue
            seen.add(key)
            ordered.append(t)
        if not ordered:
            ordered = [None]
        return ordered

    def resolve(self, question: str, state: DialogueState, position: int | None = None) -> list:
        step_index = position if position is not None else len(state.steps)
        results = []
        seen_sigs = set()
        last_err: Exception | None = None
        for upstream in self._contexts(question, state, position):
            ctx = InvertContext(state.qtype, step_index, upstream, state.entity_map)
            try:
                cands = invert(question, ctx, self.corpus)
            except NoTemplateMatch as exc:
                last_err = exc
                continue
            for c in cands:
                key = (c.descending, c.kind) if isinstance(c, SortIntent) else repr(
                    component_signature(c, state.entity_map))
                if key in seen_sigs:
                    continue
                seen_sigs.add(key)
                results.append(c)
        if not results:
            raise last_err if last_err is not None else NoTemplateMatch(question)
        return results


class OracleModel(CorrectionModel):
    """Resolves feedback by exact match against the rendered gold steps,
    falling back to template inversion for unseen questions."""

    def __init__(self, gold: Decomposition, emap: EntityMap, corpus: TemplateCorpus):
        self.gold = gold
        self.emap = emap
        self.corpus = corpus
        self.fallback = TemplateInverseModel(corpus)
        self._by_text: dict[str, object] = {}
        for i, comp in enumerate(gold.components):
            text, _ = render_component(comp, gold.qtype, i, emap, corpus)
            self._by_text[text] = comp
        if gold.sort_step is not None:
            from .render import value_kind

            kind = "number"
            for c in gold.components:
                if c.numeric_var is not None and c.triples:
                    kind = value_kind(c.triples[-1].predicate)
            self._by_text[render_sort_step(gold.sort_step, gold)] = SortIntent(
                gold.sort_step.descending, kind)

    def resolve(self, question: str, state: DialogueState, position: int | None = None) -> list:
        hit = self._by_text.get(question.strip())
        if hit is not None:
            return [hit]
        return self.fallback.resolve(question, state, position)


class FeedbackGenerator:
    """Produces the next batch of correction utterances for a dialogue."""

    def next_ops(self, state: DialogueState, gold: Decomposition, attempt: int) -> list[str]:
        raise NotImplementedError


class OracleFeedback(FeedbackGenerator):
    """Oracle error detection: diff the live decomposition against gold and
    utter the resulting edit script."""

    def __init__(self, corpus: TemplateCorpus):
        self.corpus = corpus

    def next_ops(self, state: DialogueState, gold: Decomposition, attempt: int) -> list[str]:
        script = diff_components(state.decomposition(), gold, state.entity_map, self.corpus)
        return [render_op(op) for op in script.ops]
