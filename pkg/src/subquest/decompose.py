"""Split a logical form into ordered sub-LF components and classify it.

A component is the minimal unit one sub-question describes: a single triple,
a CVT chain of two triples joined by a connector variable, or a whole union
block.  Restriction triples (category constraints such as notable_types) and
filters attach to the component that binds their variable.  CVT chains and
restriction predicates are declared in the template corpus rather than
guessed from structure.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .corpus import TemplateCorpus, union_signature
from .errors import AmbiguousGrouping, UnclassifiableForm, UnknownPredicate
from .lf import (
    HEADER_1,
    Comparison,
    LogicalForm,
    NotEqual,
    NotExists,
    SortClause,
    Term,
    Triple,
    UnionBlock,
    answer_variable,
)

COMPOSITION = "composition"
CONJUNCTION = "conjunction"
COMPARATIVE = "comparative"
SUPERLATIVE = "superlative"

QTYPES = (COMPOSITION, CONJUNCTION, COMPARATIVE, SUPERLATIVE)


@dataclass(frozen=True)
class Component:
    kind: str  # 'single' | 'cvt' | 'union'
    triples: tuple = ()  # single: 1 triple; cvt: chain of 2; union: ()
    block: UnionBlock | None = None
    restriction: Triple | None = None
    filters: tuple = ()
    input_term: Term = None
    output_var: Term = None
    numeric_var: Term | None = None

    def corpus_key(self) -> str:
        if self.kind == "single":
            return self.triples[0].predicate
        if self.kind == "cvt":
            return f"{self.triples[0].predicate}|{self.triples[1].predicate}"
        return union_signature(_block_predicates(self.block))

    def ends(self) -> tuple[Term, Term]:
        """(described end, far end) in template orientation: single/cvt chains
        run subject -> object; unions run shared-var -> asked entity."""
        if self.kind == "single":
            return self.triples[0].subject, self.triples[0].object
        if self.kind == "cvt":
            return self.triples[0].subject, self.triples[1].object
        return self.output_var, self.input_term

    def statements(self) -> list:
        """The component as LF statements (used for sub-LF text and compile)."""
        out: list = []
        if self.kind == "union":
            out.append(self.block)
        else:
            out.extend(self.triples)
        if self.restriction is not None:
            out.append(self.restriction)
        out.extend(self.filters)
        return out

    def text(self) -> str:
        return " ".join(s.text() for s in self.statements())

    def comparison(self) -> Comparison | None:
        for f in self.filters:
            if isinstance(f, Comparison):
                return f
        return None


@dataclass(frozen=True)
class Decomposition:
    qtype: str
    components: tuple
    sort_step: SortClause | None = None

    def step_count(self) -> int:
        return len(self.components) + (1 if self.sort_step else 0)


def _block_predicates(block: UnionBlock) -> list[str]:
    preds: list[str] = []

    def walk(stmts):
        for s in stmts:
            if isinstance(s, Triple):
                preds.append(s.predicate)
            elif isinstance(s, NotExists):
                walk(s.statements)

    for b in block.branches:
        walk(b)
    return preds


def _block_vars(block: UnionBlock) -> set[str]:
    out: set[str] = set()

    def walk(stmts):
        for s in stmts:
            if isinstance(s, Triple):
                out.update(t.value for t in s.terms() if t.kind == "var")
            elif isinstance(s, NotExists):
                walk(s.statements)

    for b in block.branches:
        walk(b)
    return out


def _shared_block_var(block: UnionBlock) -> str:
    per_branch = []
    for b in block.branches:
        vars_here: set[str] = set()
        for s in b:
            if isinstance(s, Triple):
                vars_here |= {t.value for t in s.terms() if t.kind == "var"}
        per_branch.append(vars_here)
    shared = set.intersection(*per_branch) if per_branch else set()
    if len(shared) == 1:
        return shared.pop()
    if not shared:
        raise AmbiguousGrouping("(union)", 0)
    # Several shared vars: prefer `x`, else lexicographic.
    return "x" if "x" in shared else min(shared)


def _first_block_entity(block: UnionBlock) -> Term | None:
    for b in block.branches:
        for s in b:
            if isinstance(s, Triple):
                for t in s.terms():
                    if t.kind in ("entity", "const"):
                        return t
    return None


def _pair_cvt(triples: list[Triple], corpus: TemplateCorpus) -> list[tuple]:
    """Group triples into cvt chains per the corpus pair declarations.
    Returns a list of ('cvt', (t1, t2)) and ('single', (t,)) groups in the
    textual order of their first triple."""
    pairs = corpus.cvt_pairs
    # connector usage count: a connector variable may join exactly 2 triples
    var_uses: dict[str, list[int]] = {}
    for i, t in enumerate(triples):
        for term in t.terms():
            if term.kind == "var":
                var_uses.setdefault(term.value, []).append(i)

    used: set[int] = set()
    groups: list[tuple] = []
    for i, t1 in enumerate(triples):
        if i in used:
            continue
        match = None
        for j, t2 in enumerate(triples):
            if j == i or j in used:
                continue
            if (t1.predicate, t2.predicate) not in pairs:
                continue
            conn = t1.object
            if conn.kind == "var" and conn == t2.subject:
                uses = var_uses.get(conn.value, [])
                if len(uses) > 2:
                    raise AmbiguousGrouping(conn.value, len(uses))
                match = j
                break
        if match is not None:
            used.update((i, match))
            groups.append(("cvt", (t1, triples[match])))
        else:
            used.add(i)
            groups.append(("single", (t1,)))
    return groups


def decompose(lf: LogicalForm, corpus: TemplateCorpus) -> Decomposition:
    """Group statements into components, attach restrictions/filters, order by
    dependency and classify the reasoning type."""
    triples = [s for s in lf.statements if isinstance(s, Triple)]
    blocks = [s for s in lf.statements if isinstance(s, UnionBlock)]
    filters = [s for s in lf.statements if isinstance(s, (Comparison, NotEqual, NotExists))]

    restrictions = [t for t in triples if t.predicate in corpus.restriction_preds]
    mains = [t for t in triples if t.predicate not in corpus.restriction_preds]

    raw: list[Component] = []
    for kind, ts in _pair_cvt(mains, corpus):
        comp = Component(kind=kind, triples=ts)
        if not corpus.has(comp.corpus_key()):
            raise UnknownPredicate(comp.corpus_key())
        raw.append(comp)
    for b in blocks:
        shared = _shared_block_var(b)
        comp = Component(
            kind="union",
            block=b,
            input_term=_first_block_entity(b),
            output_var=Term.var(shared),
        )
        if not corpus.has(comp.corpus_key()):
            raise UnknownPredicate(comp.corpus_key())
        raw.append(comp)

    def textual_pos(c: Component) -> int:
        anchor = c.block if c.kind == "union" else c.triples[0]
        for i, s in enumerate(lf.statements):
            if s is anchor:
                return i
        return len(lf.statements)

    raw.sort(key=textual_pos)
    raw = _attach_restrictions(raw, restrictions)
    raw = _attach_filters(raw, filters)
    ordered = _orient_and_order(raw, lf)
    qtype = classify(lf, ordered)
    sort_step = lf.sort
    return Decomposition(qtype, tuple(ordered), sort_step)


def _component_vars(c: Component) -> set[str]:
    if c.kind == "union":
        return _block_vars(c.block)
    return {t.value for tr in c.triples for t in tr.terms() if t.kind == "var"}


def _attach_restrictions(comps: list[Component], restrictions: list[Triple]) -> list[Component]:
    out = list(comps)
    for r in restrictions:
        if r.subject.kind != "var":
            raise AmbiguousGrouping(r.predicate, 0)
        host = None
        for i, c in enumerate(out):
            if r.subject.value in _component_vars(c) and c.restriction is None:
                host = i
                break
        if host is None:
            raise AmbiguousGrouping(r.subject.value, 0)
        out[host] = replace(out[host], restriction=r)
    return out


def _filter_var(f) -> str:
    if isinstance(f, (Comparison, NotEqual)):
        return f.var.value
    vars_ = set()
    for s in f.statements:
        if isinstance(s, Triple):
            vars_ |= {t.value for t in s.terms() if t.kind == "var"}
    return min(vars_) if vars_ else ""


def _attach_filters(comps: list[Component], filters: list) -> list[Component]:
    out = list(comps)
    for f in filters:
        v = _filter_var(f)
        host = None
        for i, c in enumerate(out):
            if v in _component_vars(c):
                host = i
                break
        if host is None:
            raise AmbiguousGrouping(v, 0)
        out[host] = replace(out[host], filters=out[host].filters + (f,))
    return out


def _orient_and_order(comps: list[Component], lf: LogicalForm) -> list[Component]:
    """Assign input/output roles and order components so producers precede
    consumers; grounded components keep their textual order."""
    sort_var = lf.sort.var.value if lf.sort else None

    def textual_pos(c: Component) -> int:
        anchor = c.block if c.kind == "union" else c.triples[0]
        for i, s in enumerate(lf.statements):
            if s is anchor:
                return i
        return len(lf.statements)

    pending = sorted(comps, key=textual_pos)
    produced: set[str] = set()
    ordered: list[Component] = []

    def numeric_term(c: Component, ends: tuple[Term, Term]) -> Term | None:
        cmp_f = c.comparison()
        if cmp_f is not None:
            return cmp_f.var
        if sort_var is not None:
            for t in ends:
                if t.kind == "var" and t.value == sort_var:
                    return t
        return None

    def orient(c: Component, force: bool) -> Component | None:
        """Fill input/output roles; None means defer until a producer ran."""
        if c.kind == "union":
            return c  # roles preassigned at grouping time
        d_end, f_end = c.triples[0].subject, c.triples[-1].object
        ends = (d_end, f_end)
        num = numeric_term(c, ends)
        grounded = [t for t in ends if t.is_grounded]
        variables = [t for t in ends if t.kind == "var"]
        if len(grounded) == 2:
            raise UnclassifiableForm(f"component {c.corpus_key()} has no variable")
        if len(grounded) == 1:
            inp, out = grounded[0], variables[0]
        else:
            avail = [t for t in ends if t.value in produced]
            if len(avail) == 1:
                inp = avail[0]
                out = f_end if inp is d_end else d_end
            elif len(avail) == 0 and not force:
                return None
            elif num is not None and num in ends:
                inp = d_end if f_end == num else f_end
                out = num
            else:
                # damaged/disconnected parse: describe subject -> object
                inp, out = d_end, f_end
        # narrowing steps (comparison filters, superlative pairing) keep the
        # entity end as both input and output; the numeric end rides along
        if num is not None and out == num and inp.kind == "var":
            out = inp
        return replace(c, input_term=inp, output_var=out, numeric_var=num)

    while pending:
        progressed = False
        for c in list(pending):
            oriented = orient(c, force=False)
            if oriented is None:
                continue
            pending.remove(c)
            ordered.append(oriented)
            produced |= _component_vars(c)
            progressed = True
            break
        if not progressed:
            c = pending.pop(0)
            ordered.append(orient(c, force=True))
            produced |= _component_vars(c)
    return ordered


def component_signature(comp: Component, emap=None) -> tuple:
    """Name-independent structural key for component equality.  Variables are
    replaced by their role (input/output/numeric) or a local occurrence index;
    entity placeholders resolve to KB ids through `emap` so a placeholder and
    an equal inline constant compare equal."""
    roles: dict[str, str] = {}
    if comp.output_var is not None and comp.output_var.kind == "var":
        roles[comp.output_var.value] = "OUT"
    if comp.input_term is not None and comp.input_term.kind == "var":
        roles.setdefault(comp.input_term.value, "IN")
    if comp.numeric_var is not None:
        roles.setdefault(comp.numeric_var.value, "NUM")
    locals_: dict[str, str] = {}

    def term_key(t: Term):
        if t.kind == "var":
            if t.value in roles:
                return ("var", roles[t.value])
            if t.value not in locals_:
                locals_[t.value] = f"v{len(locals_)}"
            return ("var", locals_[t.value])
        if t.kind == "entity":
            if emap is not None and t.value in emap.entries:
                return ("ent", emap.kb_id(t.value))
            return ("ent", f"#{t.value}")
        if t.kind == "const":
            return ("ent", t.value)
        return ("lit", t.value)

    def stmt_key(s):
        if isinstance(s, Triple):
            return ("t", term_key(s.subject), s.predicate, term_key(s.object))
        if isinstance(s, Comparison):
            return ("cmp", s.op, s.value)
        if isinstance(s, NotEqual):
            return ("neq", term_key(s.term))
        if isinstance(s, NotExists):
            return ("nex", tuple(stmt_key(x) for x in s.statements))
        raise TypeError(type(s))

    if comp.kind == "union":
        branch_keys = sorted(tuple(stmt_key(x) for x in b) for b in comp.block.branches)
        body = ("union", tuple(branch_keys))
    else:
        body = (comp.kind, tuple(stmt_key(t) for t in comp.triples))
    restriction = None
    if comp.restriction is not None:
        restriction = ("rstr", comp.restriction.predicate, term_key(comp.restriction.object))
    filters = tuple(sorted(stmt_key(f) for f in comp.filters))
    input_key = term_key(comp.input_term) if comp.input_term is not None else None
    return (body, restriction, filters, input_key)


def components_equal(a: Component, b: Component, emap=None) -> bool:
    return component_signature(a, emap) == component_signature(b, emap)


def rebind(comp: Component, input_term: Term | None, output_name: str | None) -> Component:
    """Rename a component's role variables to session names: the input variable
    becomes `input_term` and the output variable takes `output_name`."""
    mapping: dict[str, Term] = {}
    if output_name is not None and comp.output_var is not None and comp.output_var.kind == "var":
        mapping[comp.output_var.value] = Term.var(output_name)
    if input_term is not None and comp.input_term is not None and comp.input_term.kind == "var":
        mapping[comp.input_term.value] = input_term

    def sub(t: Term) -> Term:
        if t.kind == "var" and t.value in mapping:
            return mapping[t.value]
        return t

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

    return replace(
        comp,
        triples=tuple(rewrite(t) for t in comp.triples),
        block=rewrite(comp.block) if comp.block is not None else None,
        restriction=rewrite(comp.restriction) if comp.restriction is not None else None,
        filters=tuple(rewrite(f) for f in comp.filters),
        input_term=sub(comp.input_term) if comp.input_term is not None else None,
        output_var=sub(comp.output_var) if comp.output_var is not None else None,
        numeric_var=sub(comp.numeric_var) if comp.numeric_var is not None else None,
    )


def classify(lf: LogicalForm, components: list[Component]) -> str:
    """superlative > comparative > conjunction > composition, per structure;
    H1 headers break ambiguous linkage toward composition."""
    if not components:
        raise UnclassifiableForm("no components")
    if lf.sort is not None and lf.sort.limit == 1:
        return SUPERLATIVE
    if any(c.comparison() is not None for c in components):
        return COMPARATIVE
    answer = answer_variable(lf)
    sharing = [
        c for c in components if c.output_var is not None and c.output_var.kind == "var"
        and c.output_var.value == answer
    ]
    if len(sharing) >= 2:
        if lf.header == HEADER_1:
            return COMPOSITION
        return CONJUNCTION
    return COMPOSITION
