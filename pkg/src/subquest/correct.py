"""Edit scripts between decompositions, feedback parsing, op application and
compilation of corrected components back into a full logical form.

Feedback follows three fixed utterance templates:

    replace question #X with Y
    delete question #X
    insert question Y

Indices bind to the numbering displayed at utterance time; steps renumber
after every operation.  Inserts carry no position: the resolved component is
placed by dependency order among the existing steps.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace as dc_replace

from .corpus import TemplateCorpus
from .decompose import (
    COMPARATIVE,
    COMPOSITION,
    CONJUNCTION,
    SUPERLATIVE,
    Component,
    Decomposition,
    component_signature,
    decompose,
    rebind,
)
from .errors import (
    BadIndex,
    DisconnectedComponents,
    IndexOutOfRange,
    MultipleAnswerVars,
    ResolutionFailed,
    UnrecognizedOperation,
)
from .invert import SortIntent
from .lf import (
    HEADER_1,
    HEADER_2,
    Comparison,
    EntityMap,
    LogicalForm,
    NotEqual,
    NotExists,
    SortClause,
    Term,
    Triple,
    UnionBlock,
    canonicalize,
    em_equal,
    parse_lf,
)
from .render import render_component, render_sort_step
from .textdist import lcs_pairs

# ---------------------------------------------------------------------------
# edit operations


@dataclass(frozen=True)
class Replace:
    index: int
    question: str


@dataclass(frozen=True)
class Delete:
    index: int


@dataclass(frozen=True)
class Insert:
    question: str


EditOp = Replace | Delete | Insert


@dataclass(frozen=True)
class EditScript:
    ops: tuple

    def __len__(self) -> int:
        return len(self.ops)


def render_op(op: EditOp) -> str:
    if isinstance(op, Replace):
        return f"replace question #{op.index} with {op.question}"
    if isinstance(op, Delete):
        return f"delete question #{op.index}"
    if isinstance(op, Insert):
        return f"insert question {op.question}"
    raise TypeError(type(op))


_REPLACE_RE = re.compile(r"^replace question #(\S+) with (.+)$", re.IGNORECASE | re.DOTALL)
_DELETE_RE = re.compile(r"^delete question #(\S+)\s*$", re.IGNORECASE)
_INSERT_RE = re.compile(r"^insert question (.+)$", re.IGNORECASE | re.DOTALL)


def _index(raw: str) -> int:
    if not raw.isdigit() or int(raw) == 0:
        raise BadIndex(raw)
    return int(raw)


def parse_feedback(utterance: str) -> EditOp:
    """Inverse of render_op; case-insensitive on the operation prefix."""
    text = utterance.strip()
    m = _REPLACE_RE.match(text)
    if m:
        return Replace(_index(m.group(1)), m.group(2).strip())
    m = _DELETE_RE.match(text)
    if m:
        return Delete(_index(m.group(1)))
    m = _INSERT_RE.match(text)
    if m:
        return Insert(m.group(1).strip())
    raise UnrecognizedOperation(utterance)


# ---------------------------------------------------------------------------
# dialogue state


@dataclass(frozen=True)
class Step:
    component: Component | None  # None for the sort step
    sort: SortClause | None
    templated_q: str
    natural_q: str | None = None
    answers: object = None  # AnswerSet | None

    @property
    def is_sort(self) -> bool:
        return self.component is None


@dataclass(frozen=True)
class DialogueState:
    complex_question: str
    qtype: str
    steps: tuple
    entity_map: EntityMap
    corpus: TemplateCorpus = field(compare=False, repr=False, default=None)
    store: object = field(compare=False, repr=False, default=None)
    history_q: tuple = ()
    history_lf: tuple = ()
    resolutions: tuple = ()  # (question, signature) chosen by apply_op
    rejected: tuple = ()  # (question, signature) pairs excluded from resolution
    attempts_used: int = 0

    def components(self) -> list[Component]:
        return [s.component for s in self.steps if s.component is not None]

    def sort_clause(self) -> SortClause | None:
        for s in self.steps:
            if s.is_sort:
                return s.sort
        return None

    def decomposition(self) -> Decomposition:
        return Decomposition(self.qtype, tuple(self.components()), self.sort_clause())


def classify_steps(components: list[Component], sort: SortClause | None) -> str:
    """Structural re-classification after edits (no source LF available)."""
    if sort is not None and sort.limit == 1:
        return SUPERLATIVE
    if any(c.comparison() is not None for c in components):
        return COMPARATIVE
    outs = [c.output_var.value for c in components
            if c.output_var is not None and c.output_var.kind == "var"]
    if not outs:
        return COMPOSITION
    consumed = {c.input_term.value for c in components
                if c.input_term is not None and c.input_term.kind == "var"
                and c.input_term is not c.output_var}
    terminals = [o for o in outs if o not in consumed] or outs[-1:]
    answer = terminals[-1]
    if sum(1 for o in outs if o == answer) >= 2:
        return CONJUNCTION
    return COMPOSITION


def _build_steps(components: list[Component], sort: SortClause | None, qtype: str,
                 emap: EntityMap, corpus: TemplateCorpus, store) -> tuple:
    d = Decomposition(qtype, tuple(components), sort)
    steps = []
    answers: list = [None] * d.step_count()
    if store is not None:
        try:
            from .kb import eval_decomposition

            per_step, _ = eval_decomposition(store, d, emap)
            answers = list(per_step) + [None] * (d.step_count() - len(per_step))
        except Exception:
            answers = [None] * d.step_count()
    for i, comp in enumerate(components):
        text, _ = render_component(comp, qtype, i, emap, corpus)
        steps.append(Step(comp, None, text, answers=answers[i]))
    if sort is not None:
        idx = len(components)
        ans = answers[idx] if idx < len(answers) else None
        steps.append(Step(None, sort, render_sort_step(sort, d), answers=ans))
    return tuple(steps)


def new_state(question: str, predicted_lf: LogicalForm | str, emap: EntityMap,
              corpus: TemplateCorpus, store=None) -> DialogueState:
    lf = parse_lf(predicted_lf) if isinstance(predicted_lf, str) else predicted_lf
    d = decompose(lf, corpus)
    steps = _build_steps(list(d.components), d.sort_step, d.qtype, emap, corpus, store)
    return DialogueState(
        complex_question=question,
        qtype=d.qtype,
        steps=steps,
        entity_map=emap,
        corpus=corpus,
        store=store,
        history_q=tuple(s.templated_q for s in steps),
        history_lf=tuple(s.component.text() for s in steps if s.component is not None),
    )


# ---------------------------------------------------------------------------
# diffing


def _sort_signature(sort: SortClause) -> tuple:
    return ("sort", sort.descending, sort.limit)


def _item_signatures(d: Decomposition, emap: EntityMap) -> list:
    sigs = [("comp", component_signature(c, emap)) for c in d.components]
    if d.sort_step is not None:
        sigs.append(_sort_signature(d.sort_step))
    return sigs


def _render_gold_item(d: Decomposition, j: int, emap: EntityMap, corpus: TemplateCorpus) -> str:
    if j < len(d.components):
        text, _ = render_component(d.components[j], d.qtype, j, emap, corpus)
        return text
    return render_sort_step(d.sort_step, d)


def diff_components(pred: Decomposition, gold: Decomposition, emap: EntityMap,
                    corpus: TemplateCorpus) -> EditScript:
    """LCS alignment under canonical component equality.  Emits deletes
    (highest displayed index first), then replaces (indices as displayed after
    the deletes), then inserts, so that sequential application with
    renumbering reproduces the gold decomposition."""
    pred_sigs = _item_signatures(pred, emap)
    gold_sigs = _item_signatures(gold, emap)
    interned: dict = {}
    pred_ids = [interned.setdefault(repr(s), len(interned)) for s in pred_sigs]
    gold_ids = [interned.setdefault(repr(s), len(interned)) for s in gold_sigs]
    matches = lcs_pairs(pred_ids, gold_ids)

    replaces_raw: list[tuple[int, int]] = []  # (pred idx, gold idx)
    deletes_raw: list[int] = []
    inserts_raw: list[int] = []
    anchors = matches + [(len(pred_ids), len(gold_ids))]
    pi = gi = 0
    for ap, ag in anchors:
        gap_pred = list(range(pi, ap))
        gap_gold = list(range(gi, ag))
        for k in range(min(len(gap_pred), len(gap_gold))):
            replaces_raw.append((gap_pred[k], gap_gold[k]))
        deletes_raw.extend(gap_pred[len(gap_gold):])
        inserts_raw.extend(gap_gold[len(gap_pred):])
        pi, gi = ap + 1, ag + 1

    ops: list[EditOp] = []
    for idx in sorted(deletes_raw, reverse=True):
        ops.append(Delete(idx + 1))
    deleted = sorted(deletes_raw)
    for idx, j in sorted(replaces_raw):
        shifted = idx - sum(1 for d_ in deleted if d_ < idx)
        ops.append(Replace(shifted + 1, _render_gold_item(gold, j, emap, corpus)))
    for j in sorted(inserts_raw):
        ops.append(Insert(_render_gold_item(gold, j, emap, corpus)))
    return EditScript(tuple(ops))


# ---------------------------------------------------------------------------
# applying operations


class CorrectionModel:
    """Resolves a templated question to ranked Component/SortIntent candidates.
    `position` is the 0-based step slot being replaced, or None for inserts."""

    def resolve(self, question: str, state: DialogueState, position: int | None = None) -> list:
        raise NotImplementedError


def _rejected_set(state: DialogueState, question: str) -> set:
    return {sig for q, sig in state.rejected if q == question}


def _dependency_consistent(components: list[Component]) -> bool:
    produced: set[str] = set()
    for c in components:
        if c.input_term is not None and c.input_term.kind == "var":
            if c.input_term.value not in produced:
                return False
        if c.output_var is not None and c.output_var.kind == "var":
            produced.add(c.output_var.value)
        if c.numeric_var is not None:
            produced.add(c.numeric_var.value)
    return True


def _fresh_var(components: list[Component], base: str = "x") -> str:
    used = set()
    for c in components:
        for s in c.statements():
            used.update(_stmt_var_names(s))
    if base not in used:
        return base
    i = 2
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


def _stmt_var_names(s) -> set:
    out = set()
    if isinstance(s, Triple):
        out = {t.value for t in s.terms() if t.kind == "var"}
    elif isinstance(s, Comparison):
        out = {s.var.value}
    elif isinstance(s, NotEqual):
        out = {s.var.value}
    elif isinstance(s, NotExists):
        for x in s.statements:
            out |= _stmt_var_names(x)
    elif isinstance(s, UnionBlock):
        for b in s.branches:
            for x in b:
                out |= _stmt_var_names(x)
    return out


def _place_insert(components: list[Component], comp: Component) -> tuple[int, Component]:
    """Choose the dependency-order slot for a resolved component, rebinding its
    output onto a dangling consumer variable when one exists."""
    producers = {c.output_var.value: i for i, c in enumerate(components)
                 if c.output_var is not None and c.output_var.kind == "var"}
    dangling = [
        (i, c.input_term.value) for i, c in enumerate(components)
        if c.input_term is not None and c.input_term.kind == "var"
        and c.input_term.value not in producers
    ]
    lo = 0
    if comp.input_term is not None and comp.input_term.kind == "var":
        if comp.input_term.value in producers:
            lo = producers[comp.input_term.value] + 1
    out_name = None
    hi = len(components)
    if comp.output_var is not None and comp.output_var.kind == "var":
        if dangling:
            hi, out_name = dangling[0]
        else:
            consumers = [i for i, c in enumerate(components)
                         if c.input_term is not None and c.input_term.kind == "var"
                         and c.input_term.value == comp.output_var.value]
            if consumers:
                hi = min(consumers)
    if out_name is not None and comp.output_var.value != out_name:
        comp = rebind(comp, None, out_name)
    pos = min(max(lo, 0), hi) if lo <= hi else hi
    return pos, comp


def apply_op(state: DialogueState, op: EditOp, model: CorrectionModel) -> DialogueState:
    """Apply one edit operation; returns a new state with steps re-rendered,
    the question type re-derived and downstream answers recomputed."""
    steps = list(state.steps)
    n = len(steps)

    if isinstance(op, (Replace, Delete)) and not 1 <= op.index <= n:
        raise IndexOutOfRange(op.index, n)

    components = state.components()
    sort = state.sort_clause()
    new_history_q = state.history_q
    new_history_lf = state.history_lf
    resolutions = state.resolutions

    if isinstance(op, Delete):
        target = steps[op.index - 1]
        if target.is_sort:
            sort = None
        else:
            components = [c for c in components if c is not target.component]
    else:
        question = op.question
        position = op.index - 1 if isinstance(op, Replace) else None
        rejected = _rejected_set(state, question)
        try:
            candidates = model.resolve(question, state, position)
        except Exception as exc:
            raise ResolutionFailed(question, str(exc)) from exc
        chosen = None
        chosen_sig = None
        placement = None
        for cand in candidates:
            sig = ("sortintent", cand.descending, cand.kind) if isinstance(cand, SortIntent) \
                else repr(component_signature(cand, state.entity_map))
            if sig in rejected:
                continue
            if isinstance(cand, SortIntent):
                chosen, chosen_sig = cand, sig
                break
            if isinstance(op, Insert):
                pos, bound = _place_insert(components, cand)
                trial = components[:pos] + [bound] + components[pos:]
                if _dependency_consistent(trial):
                    chosen, chosen_sig, placement = bound, sig, pos
                    break
                if chosen is None:  # keep the first as fallback
                    chosen, chosen_sig, placement = bound, sig, pos
            else:
                chosen, chosen_sig = cand, sig
                break
        if chosen is None:
            raise ResolutionFailed(question)

        if isinstance(chosen, SortIntent):
            numeric = None
            for c in components:
                if c.numeric_var is not None:
                    numeric = c.numeric_var
            sort = SortClause(numeric if numeric is not None else Term.var("num"),
                              chosen.descending, 1)
            if isinstance(op, Replace):
                target = steps[op.index - 1]
                if not target.is_sort:
                    components = [c for c in components if c is not target.component]
        else:
            if isinstance(op, Replace):
                target = steps[op.index - 1]
                if target.is_sort:
                    sort = None
                    pos, bound = _place_insert(components, chosen)
                    components = components[:pos] + [bound] + components[pos:]
                else:
                    old = target.component
                    out_name = None
                    if old.output_var is not None and old.output_var.kind == "var" \
                            and chosen.output_var is not None and chosen.output_var.kind == "var" \
                            and chosen.output_var.value != old.output_var.value:
                        out_name = old.output_var.value
                    bound = rebind(chosen, old.input_term if old.input_term is not None
                                   and old.input_term.kind == "var" else None, out_name)
                    components = [bound if c is old else c for c in components]
            else:
                components = components[:placement] + [chosen] + components[placement:]
            new_history_lf = new_history_lf + (chosen.text(),)
        new_history_q = new_history_q + (question,)
        resolutions = resolutions + ((question, chosen_sig),)

    qtype = classify_steps(components, sort)
    new_steps = _build_steps(components, sort, qtype, state.entity_map, state.corpus, state.store)
    return dc_replace(
        state,
        qtype=qtype,
        steps=new_steps,
        history_q=new_history_q,
        history_lf=new_history_lf,
        resolutions=resolutions,
    )


# ---------------------------------------------------------------------------
# compiling


_WIRE_NAMES = ["c", "y", "k"] + [f"v{i}" for i in range(4, 24)]


def compile_state(state: DialogueState) -> LogicalForm:
    """Compile the session's components into a canonical logical form."""
    return compile_components(state.components(), state.sort_clause(), state.qtype)


def compile_components(components: list[Component], sort: SortClause | None,
                       qtype: str | None = None) -> LogicalForm:
    if not components:
        raise DisconnectedComponents("no steps to compile")
    if qtype is None:
        qtype = classify_steps(components, sort)

    produced: set[str] = set()
    for c in components:
        if c.input_term is not None and c.input_term.kind == "var":
            if c.input_term.value not in produced:
                raise DisconnectedComponents(
                    f"step consumes ?{c.input_term.value} before any step produces it"
                )
        if c.output_var is not None and c.output_var.kind == "var":
            produced.add(c.output_var.value)
        if c.numeric_var is not None:
            produced.add(c.numeric_var.value)

    outs = [c.output_var.value for c in components
            if c.output_var is not None and c.output_var.kind == "var"]
    consumed = {c.input_term.value for c in components
                if c.input_term is not None and c.input_term.kind == "var"}
    terminals = []
    for o in outs:
        if (o not in consumed or any(
                c.input_term is not None and c.input_term.kind == "var"
                and c.input_term.value == o and c.output_var is not None
                and c.output_var.kind == "var" and c.output_var.value == o
                for c in components)) and o not in terminals:
            terminals.append(o)
    if len(terminals) > 1:
        raise MultipleAnswerVars(f"unconnected answer variables: {terminals}")
    answer = terminals[0] if terminals else outs[-1]

    numeric_names = {c.numeric_var.value for c in components if c.numeric_var is not None}
    wire_pool = iter(_WIRE_NAMES)
    rename: dict[str, str] = {answer: "x"}

    def wire(name: str) -> str:
        if name not in rename:
            if name in numeric_names:
                rename[name] = "num" if "num" not in rename.values() else name
            else:
                rename[name] = next(wire_pool)
        return rename[name]

    statements: list = []
    internal_counter = [0]
    for c in components:
        local: dict[str, str] = {}
        role_names = set()
        for t in (c.input_term, c.output_var, c.numeric_var):
            if t is not None and t.kind == "var":
                role_names.add(t.value)

        def sub(t: Term) -> Term:
            if t.kind != "var":
                return t
            if t.value in role_names:
                return Term.var(wire(t.value))
            if t.value not in local:
                internal_counter[0] += 1
                local[t.value] = f"i{internal_counter[0]}"
            return Term.var(local[t.value])

        def rewrite(s):
            if isinstance(s, Triple):
                return Triple(sub(s.subject), s.predicate, sub(s.object))
            if isinstance(s, Comparison):
                return Comparison(sub(s.var), s.op, s.value)
            if isinstance(s, NotEqual):
                return NotEqual(sub(s.var), sub(s.term))
            if isinstance(s, NotExists):
                return NotExists(tuple(rewrite(x) for x in s.statements))
            if isinstance(s, UnionBlock):
                return UnionBlock(tuple(tuple(rewrite(x) for x in b) for b in s.branches), s.labels)
            raise TypeError(type(s))

        statements.extend(rewrite(s) for s in c.statements())

    sort_clause = None
    if sort is not None:
        sort_name = None
        for c in components:
            if c.numeric_var is not None:
                sort_name = wire(c.numeric_var.value)
        if sort_name is None:
            raise DisconnectedComponents("sort step has no numeric step to order by")
        sort_clause = SortClause(Term.var(sort_name), sort.descending, sort.limit)

    header = HEADER_1 if qtype == COMPOSITION else HEADER_2
    return canonicalize(LogicalForm(header, tuple(statements), sort_clause))


def states_match(state: DialogueState, gold_lf: LogicalForm) -> bool:
    try:
        return em_equal(compile_state(state), gold_lf)
    except Exception:
        return False
