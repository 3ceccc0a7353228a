"""In-memory triple store and step-wise evaluator for decompositions.

The store is a desk-scale stand-in for a full knowledge base: a TSV of
(subject, predicate, object) rows with (s,p) and (p,o) indexes.  Components
evaluate by joining their triples over the store; decompositions pipe,
intersect, filter or sort the per-step answer sets according to the question
type.  Empty intermediate answers propagate rather than erroring so that
correction dialogues can proceed past a wrong step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .decompose import COMPOSITION, CONJUNCTION, Decomposition, Component
from .errors import StoreParseError, TypeMismatch
from .lf import Comparison, EntityMap, NotEqual, NotExists, Term, Triple, UnionBlock

Value = str | int | float

EMPTY_MARKER = "(no answers found)"


def _order_key(v):
    return (str(type(v)), v)


@dataclass
class AnswerSet:
    """Deduplicated step answers; numeric keys attach when a sort step follows.
    A value may carry several keys (multi-valued numeric predicates), kept as
    a sorted tuple."""

    values: set = field(default_factory=set)
    keys: dict = field(default_factory=dict)  # value -> tuple of numeric keys

    def __bool__(self) -> bool:
        return bool(self.values)

    def add_key(self, value, key):
        have = set(self.keys.get(value, ()))
        have.add(key)
        self.keys[value] = tuple(sorted(have, key=_order_key))

    def sorted_values(self) -> list:
        return sorted(self.values, key=_order_key)

    def display(self) -> list[str]:
        if not self.values:
            return [EMPTY_MARKER]
        out = []
        for v in self.sorted_values():
            if v in self.keys:
                out.append(f"{v} ({', '.join(str(k) for k in self.keys[v])})")
            else:
                out.append(str(v))
        return out

    def to_json(self) -> list:
        return self.sorted_values()


class TripleStore:
    def __init__(self):
        self.triples: set[tuple] = set()
        self.by_sp: dict[tuple, set] = {}
        self.by_po: dict[tuple, set] = {}
        self.by_p: dict[str, set] = {}

    def __len__(self) -> int:
        return len(self.triples)

    def add(self, s: Value, p: str, o: Value):
        row = (s, p, o)
        if row in self.triples:
            return
        self.triples.add(row)
        self.by_sp.setdefault((s, p), set()).add(o)
        self.by_po.setdefault((p, o), set()).add(s)
        self.by_p.setdefault(p, set()).add((s, o))

    def objects(self, s: Value, p: str) -> set:
        return self.by_sp.get((s, p), set())

    def subjects(self, p: str, o: Value) -> set:
        return self.by_po.get((p, o), set())

    def pairs(self, p: str) -> set:
        return self.by_p.get(p, set())

    def constants(self) -> set:
        out = set()
        for s, _, o in self.triples:
            out.add(s)
            out.add(o)
        return out


def _coerce(token: str) -> Value:
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return token


def load_store(path: str | Path) -> TripleStore:
    """Load a TSV store: subject<TAB>predicate<TAB>object, `#` comments."""
    store = TripleStore()
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3 or not all(c.strip() for c in cols):
            raise StoreParseError(line_no, line)
        s, p, o = (c.strip() for c in cols)
        store.add(s, p, _coerce(o))
    return store


# ---------------------------------------------------------------------------
# component evaluation


def _ground(term: Term, emap: EntityMap | None) -> Value:
    if term.kind == "entity":
        if emap is None:
            raise TypeMismatch(f"no entity map for {term.text()}")
        return emap.kb_id(term.value)
    if term.kind == "const":
        return term.value
    if term.kind == "literal":
        return term.value
    raise TypeMismatch(f"cannot ground variable {term.text()}")


def _join(store: TripleStore, statements: list, bindings: list[dict],
          emap: EntityMap | None) -> list[dict]:
    """Nested-loop join of triple statements; filters apply once their
    variables are bound."""
    triples = [s for s in statements if isinstance(s, Triple)]
    filters = [s for s in statements if not isinstance(s, Triple)]
    rows = bindings
    for t in triples:
        rows = _join_triple(store, t, rows, emap)
        if not rows:
            break
    out = []
    for row in rows:
        if all(_check_filter(store, f, row, emap) for f in filters):
            out.append(row)
    return out


def _term_value(term: Term, row: dict, emap: EntityMap | None):
    if term.kind == "var":
        return row.get(term.value)
    return _ground(term, emap)


def _join_triple(store: TripleStore, t: Triple, rows: list[dict],
                 emap: EntityMap | None) -> list[dict]:
    out = []
    for row in rows:
        s_val = _term_value(t.subject, row, emap)
        o_val = _term_value(t.object, row, emap)
        if s_val is not None and o_val is not None:
            if o_val in store.objects(s_val, t.predicate):
                out.append(row)
        elif s_val is not None:
            for o in store.objects(s_val, t.predicate):
                out.append({**row, t.object.value: o})
        elif o_val is not None:
            for s in store.subjects(t.predicate, o_val):
                out.append({**row, t.subject.value: s})
        else:
            for s, o in store.pairs(t.predicate):
                if t.subject.value == t.object.value and s != o:
                    continue
                out.append({**row, t.subject.value: s, t.object.value: o})
    return out


def _check_filter(store: TripleStore, f, row: dict, emap: EntityMap | None) -> bool:
    if isinstance(f, Comparison):
        val = row.get(f.var.value)
        if val is None:
            return True  # unconstrained here; the component carrying it checks
        if isinstance(val, str):
            raise TypeMismatch(f"comparison over non-numeric value {val!r}")
        return val > f.value if f.op == ">" else val < f.value
    if isinstance(f, NotEqual):
        val = row.get(f.var.value)
        if val is None:
            return True
        return val != _ground(f.term, emap)
    if isinstance(f, NotExists):
        # anonymous [] objects match anything
        stmts = []
        for s in f.statements:
            if isinstance(s, Triple) and s.object.kind == "const" and s.object.value == "[]":
                subj = _term_value(s.subject, row, emap)
                if subj is None:
                    return True
                if any(True for (x, o) in store.pairs(s.predicate) if x == subj):
                    return False
                continue
            stmts.append(s)
        if stmts:
            return not _join(store, stmts, [dict(row)], emap)
        return True
    raise TypeMismatch(f"unsupported filter {f!r}")


def eval_component(store: TripleStore, comp: Component, inputs, emap: EntityMap | None = None) -> AnswerSet:
    """Evaluate one component.  `inputs` is an AnswerSet (upstream values), a
    raw value, or None when the component grounds itself."""
    seed_values = None
    if isinstance(inputs, AnswerSet):
        seed_values = inputs.values
    elif inputs is not None:
        seed_values = {inputs}

    in_var = comp.input_term.value if comp.input_term is not None and comp.input_term.kind == "var" else None
    base_rows: list[dict]
    if in_var is not None and seed_values is not None:
        base_rows = [{in_var: v} for v in seed_values]
    else:
        base_rows = [{}]

    if comp.kind == "union":
        rows: list[dict] = []
        for branch in comp.block.branches:
            rows.extend(_join(store, list(branch), [dict(r) for r in base_rows], emap))
    else:
        rows = _join(store, list(comp.triples), base_rows, emap)

    if comp.restriction is not None:
        rows = _join(store, [comp.restriction], rows, emap)
    if comp.filters:
        rows = [r for r in rows if all(_check_filter(store, f, r, emap) for f in comp.filters)]

    out = AnswerSet()
    out_var = comp.output_var.value if comp.output_var is not None and comp.output_var.kind == "var" else None
    num_var = comp.numeric_var.value if comp.numeric_var is not None else None
    for row in rows:
        if out_var is None or out_var not in row:
            continue
        v = row[out_var]
        out.values.add(v)
        if num_var is not None and num_var in row and num_var != out_var:
            out.add_key(v, row[num_var])
    return out


def eval_decomposition(store: TripleStore, d: Decomposition,
                       emap: EntityMap | None) -> tuple[list[AnswerSet], AnswerSet]:
    """Per-step answers plus the final answer, per question type: composition
    pipes, conjunction intersects, comparative pipes through the filter step,
    superlative sorts (entity, key) pairs and keeps the limit head."""
    steps: list[AnswerSet] = []
    by_var: dict[str, AnswerSet] = {}
    current: AnswerSet | None = None
    for comp in d.components:
        if comp.input_term is not None and comp.input_term.kind == "var":
            upstream = by_var.get(comp.input_term.value, current)
        else:
            upstream = None
        result = eval_component(store, comp, upstream, emap)
        if (d.qtype == CONJUNCTION and comp.output_var is not None
                and comp.output_var.kind == "var" and comp.output_var.value in by_var):
            prev = by_var[comp.output_var.value]
            merged = AnswerSet(values=prev.values & result.values)
            for side in (prev, result):
                for v, ks in side.keys.items():
                    if v in merged.values:
                        for k in ks:
                            merged.add_key(v, k)
            by_var[comp.output_var.value] = merged
        elif comp.output_var is not None and comp.output_var.kind == "var":
            by_var[comp.output_var.value] = result
        steps.append(result)
        current = result

    if not steps:
        return [], AnswerSet()

    last = d.components[-1]
    if last.output_var is not None and last.output_var.kind == "var":
        final = by_var.get(last.output_var.value, steps[-1])
    else:
        final = steps[-1]

    if d.sort_step is not None:
        # each value competes with its best key for the sort direction
        pick = max if d.sort_step.descending else min
        keyed = [(v, pick(ks, key=_order_key)) for v, ks in final.keys.items()
                 if v in final.values and ks]
        if not keyed:
            sort_result = AnswerSet()
        else:
            keyed.sort(key=lambda vk: (_order_key(vk[1]), str(vk[0])),
                       reverse=d.sort_step.descending)
            head = keyed[: d.sort_step.limit]
            sort_result = AnswerSet(values={v for v, _ in head},
                                    keys={v: (k,) for v, k in head})
        steps.append(sort_result)
        final = sort_result
    return steps, final
