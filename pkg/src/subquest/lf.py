"""SPARQL-subset logical forms: parse, serialize, canonicalize, (de)lexicalize.

The grammar covers the query fragment produced for ComplexWebQuestions-style
KBQA: an opaque header token, ` . `-separated triple statements with dotted
`ns:` predicates, numeric comparison / inequality / not-exists filters,
`{ ... } union { ... }` blocks with optional `# label` branch comments, and a
trailing `} order by ?v limit N` sort clause.  Named entities appear as
`#entityN#` placeholders; an EntityMap binds them to surface forms and KB ids.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import EntityNotFound, LfSyntaxError, MissingEntity, UnboundVariable

HEADER_1 = "<sparql-header-1>"
HEADER_2 = "<sparql-header-2>"

ENTITY_RE = re.compile(r"#entity(\d+)#")

# The anonymous-node token only occurs inside `not exists` statements.
ANON = "[]"


@dataclass(frozen=True)
class Term:
    """One slot of a triple: variable, entity placeholder, literal or KB constant."""

    kind: str  # 'var' | 'entity' | 'literal' | 'const'
    value: str | int | float

    @staticmethod
    def var(name: str) -> "Term":
        if not name:
            raise ValueError("empty variable name")
        return Term("var", name)

    @staticmethod
    def entity(index: int) -> "Term":
        if index < 1:
            raise ValueError("entity placeholder indices start at 1")
        return Term("entity", index)

    @staticmethod
    def literal(value: int | float | str) -> "Term":
        return Term("literal", value)

    @staticmethod
    def const(kb_id: str) -> "Term":
        return Term("const", kb_id)

    @property
    def is_grounded(self) -> bool:
        """True for terms that evaluation can bind without upstream input."""
        return self.kind in ("entity", "const", "literal")

    def text(self) -> str:
        if self.kind == "var":
            return f"?{self.value}"
        if self.kind == "entity":
            return f"#entity{self.value}#"
        if self.kind == "const":
            return self.value if self.value == ANON else f"ns:{self.value}"
        if isinstance(self.value, str):
            return f'"{self.value}"'
        return format_number(self.value)


def format_number(x: int | float) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: str  # dotted path, `ns:` prefix stripped
    object: Term

    def __post_init__(self):
        if self.predicate.count(".") < 1:
            raise ValueError(f"predicate {self.predicate!r} is not a dotted path")
        if self.subject.kind == "literal" and self.object.kind == "literal":
            raise ValueError("subject and object cannot both be literals")

    def text(self) -> str:
        return f"{self.subject.text()} ns:{self.predicate} {self.object.text()} ."

    def terms(self) -> tuple[Term, Term]:
        return (self.subject, self.object)


@dataclass(frozen=True)
class Comparison:
    """`filter ( xsd:integer ( ?num ) > 590 )`"""

    var: Term
    op: str  # '<' or '>'
    value: int | float

    def __post_init__(self):
        if self.op not in ("<", ">"):
            raise ValueError(f"unsupported comparison operator {self.op!r}")

    def text(self) -> str:
        return f"filter ( xsd:integer ( {self.var.text()} ) {self.op} {format_number(self.value)} ) ."


@dataclass(frozen=True)
class NotEqual:
    """`filter ( ?x != #entity1# )`"""

    var: Term
    term: Term

    def text(self) -> str:
        return f"filter ( {self.var.text()} != {self.term.text()} )"


@dataclass(frozen=True)
class NotExists:
    """`filter ( not exists { ... } )`"""

    statements: tuple

    def text(self) -> str:
        inner = " ".join(s.text() for s in self.statements)
        return f"filter ( not exists {{ {inner} }} )"


FilterClause = Comparison | NotEqual | NotExists


@dataclass(frozen=True)
class UnionBlock:
    """`{ branch } union { branch } ...`; branch labels come from `# name` comments."""

    branches: tuple  # tuple of tuples of statements
    labels: tuple = ()

    def __post_init__(self):
        if len(self.branches) < 2:
            raise ValueError("union needs at least 2 branches")
        if any(not b for b in self.branches):
            raise ValueError("empty union branch")

    def text(self) -> str:
        parts = []
        for i, branch in enumerate(self.branches):
            label = self.labels[i] if i < len(self.labels) and self.labels[i] else None
            body = " ".join(s.text() for s in branch)
            parts.append((f"# {label} " if label else "") + body)
        return "{ " + " } union { ".join(parts) + " }"


Statement = Triple | Comparison | NotEqual | NotExists | UnionBlock


@dataclass(frozen=True)
class SortClause:
    var: Term
    descending: bool
    limit: int

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError("sort limit must be positive")

    def text(self) -> str:
        v = f"desc ( {self.var.text()} )" if self.descending else self.var.text()
        return f"}} order by {v} limit {self.limit}"


@dataclass(frozen=True)
class LogicalForm:
    header: str
    statements: tuple
    sort: SortClause | None = None

    def triples(self, include_nested: bool = True) -> list[Triple]:
        """All triples, optionally including those inside unions and not-exists."""
        out: list[Triple] = []

        def walk(stmts):
            for s in stmts:
                if isinstance(s, Triple):
                    out.append(s)
                elif isinstance(s, UnionBlock) and include_nested:
                    for b in s.branches:
                        walk(b)
                elif isinstance(s, NotExists) and include_nested:
                    walk(s.statements)

        walk(self.statements)
        return out

    def variables(self) -> list[str]:
        seen: list[str] = []
        for t in self.triples():
            for term in t.terms():
                if term.kind == "var" and term.value not in seen:
                    seen.append(term.value)
        return seen


# ---------------------------------------------------------------------------
# tokenizer / parser


def _tokenize(text: str) -> list[str]:
    # Make braces, parens and the anonymous node self-delimiting, then split.
    text = text.replace("[]", " [] ")
    for ch in "(){}":
        text = text.replace(ch, f" {ch} ")
    # Guard against placeholders glued to the next token (line-wrap artifacts).
    text = ENTITY_RE.sub(lambda m: f" #entity{m.group(1)}# ", text)
    return text.split()


_NUM_RE = re.compile(r"^-?\d+(\.\d+)?$")


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, expected: str) -> str:
        tok = self.peek()
        if tok is None:
            raise LfSyntaxError(self.i, expected, "end of input")
        self.i += 1
        return tok

    def expect(self, literal: str):
        tok = self.next(literal)
        if tok != literal:
            raise LfSyntaxError(self.i - 1, literal, tok)

    def eat(self, literal: str) -> bool:
        if self.peek() == literal:
            self.i += 1
            return True
        return False

    # -- terms ---------------------------------------------------------

    def term(self) -> Term:
        tok = self.next("a term")
        return self.term_from(tok)

    def term_from(self, tok: str) -> Term:
        if tok.startswith("?"):
            if len(tok) == 1:
                raise LfSyntaxError(self.i - 1, "variable name", tok)
            return Term.var(tok[1:])
        m = ENTITY_RE.fullmatch(tok)
        if m:
            return Term.entity(int(m.group(1)))
        if tok == ANON:
            return Term.const(ANON)
        if tok.startswith("ns:"):
            return Term.const(tok[3:])
        if _NUM_RE.match(tok):
            return Term.literal(_parse_number(tok))
        if tok.startswith('"') and tok.endswith('"') and len(tok) >= 2:
            return Term.literal(tok[1:-1])
        raise LfSyntaxError(self.i - 1, "a term", tok)

    def predicate(self) -> str:
        tok = self.next("ns:-prefixed predicate")
        if not tok.startswith("ns:") or tok[3:].count(".") < 1:
            raise LfSyntaxError(self.i - 1, "ns:-prefixed dotted predicate", tok)
        return tok[3:]

    # -- statements ----------------------------------------------------

    def statements(self, stop: tuple[str, ...]) -> list[Statement]:
        out: list[Statement] = []
        while True:
            tok = self.peek()
            if tok is None or tok in stop:
                return out
            if tok == "filter":
                out.append(self.filter_clause())
            elif tok == "{":
                out.append(self.union_block())
            else:
                out.append(self.triple())
            self.eat(".")

    def triple(self) -> Triple:
        subj = self.term()
        pred = self.predicate()
        obj = self.term()
        try:
            return Triple(subj, pred, obj)
        except ValueError as exc:
            raise LfSyntaxError(self.i - 1, str(exc)) from exc

    def filter_clause(self) -> FilterClause:
        self.expect("filter")
        self.expect("(")
        tok = self.next("filter body")
        if tok == "xsd:integer":
            self.expect("(")
            var = self.term()
            if var.kind != "var":
                raise LfSyntaxError(self.i - 1, "variable in comparison", var.text())
            self.expect(")")
            op = self.next("< or >")
            if op not in ("<", ">"):
                raise LfSyntaxError(self.i - 1, "< or >", op)
            val = self.next("number")
            if not _NUM_RE.match(val):
                raise LfSyntaxError(self.i - 1, "number", val)
            self.expect(")")
            return Comparison(var, op, _parse_number(val))
        if tok == "not":
            self.expect("exists")
            self.expect("{")
            inner = self.statements(stop=("}",))
            self.expect("}")
            self.expect(")")
            return NotExists(tuple(inner))
        # inequality: `?x != term`
        var = self.term_from(tok)
        if var.kind != "var":
            raise LfSyntaxError(self.i - 1, "variable on the left of !=", tok)
        self.expect("!=")
        other = self.term()
        self.expect(")")
        return NotEqual(var, other)

    def union_block(self) -> UnionBlock:
        branches: list[tuple] = []
        labels: list[str | None] = []
        self.expect("{")
        while True:
            labels.append(self._branch_label())
            body = self.statements(stop=("}",))
            if not body:
                raise LfSyntaxError(self.i, "nonempty union branch")
            branches.append(tuple(body))
            self.expect("}")
            if not self.eat("union"):
                break
            self.expect("{")
        if len(branches) < 2:
            raise LfSyntaxError(self.i, "`union` keyword", self.peek() or "end of input")
        return UnionBlock(tuple(branches), tuple(labels))

    def _branch_label(self) -> str | None:
        tok = self.peek()
        if tok is None:
            return None
        if tok == "#":
            self.i += 1
            return self.next("branch label")
        if tok.startswith("#") and not ENTITY_RE.fullmatch(tok):
            self.i += 1
            return tok[1:]
        return None

    def sort_clause(self) -> SortClause:
        self.expect("}")
        self.expect("order")
        self.expect("by")
        descending = False
        if self.eat("desc"):
            self.expect("(")
            var = self.term()
            self.expect(")")
            descending = True
        else:
            var = self.term()
        if var.kind != "var":
            raise LfSyntaxError(self.i - 1, "sort variable", var.text())
        self.expect("limit")
        n = self.next("limit count")
        if not n.isdigit() or int(n) < 1:
            raise LfSyntaxError(self.i - 1, "positive limit", n)
        return SortClause(var, descending, int(n))


def _parse_number(tok: str) -> int | float:
    return float(tok) if "." in tok else int(tok)


def parse_lf(text: str) -> LogicalForm:
    """Parse logical-form text into a structured LogicalForm.

    Raises LfSyntaxError on malformed input and UnboundVariable when a
    filter or sort clause references a variable no triple binds.
    """
    toks = _tokenize(text)
    p = _Parser(toks)
    header = p.next("header token")
    if header not in (HEADER_1, HEADER_2):
        raise LfSyntaxError(0, f"{HEADER_1} or {HEADER_2}", header)
    statements = p.statements(stop=("}",))
    sort = None
    if p.peek() == "}":
        sort = p.sort_clause()
    if p.peek() is not None:
        raise LfSyntaxError(p.i, "end of input", p.peek())
    if not statements:
        raise LfSyntaxError(p.i, "at least one statement")
    lf = LogicalForm(header, tuple(statements), sort)
    _check_bound_vars(lf)
    return lf


def _check_bound_vars(lf: LogicalForm):
    bound = {t.value for tr in lf.triples() for t in tr.terms() if t.kind == "var"}

    def check(var: Term):
        if var.value not in bound:
            raise UnboundVariable(var.value)

    for s in lf.statements:
        if isinstance(s, Comparison):
            check(s.var)
        elif isinstance(s, NotEqual):
            check(s.var)
    if lf.sort:
        check(lf.sort.var)


def serialize(lf: LogicalForm) -> str:
    """Emit the surface syntax parse_lf accepts; statements joined by single spaces."""
    parts = [lf.header]
    parts.extend(s.text() for s in lf.statements)
    if lf.sort:
        parts.append(lf.sort.text())
    return " ".join(parts)


# ---------------------------------------------------------------------------
# canonicalization

_CANON_INTERMEDIATES = ["c", "y", "k"]


def _statement_vars(s: Statement) -> set[str]:
    if isinstance(s, Triple):
        return {t.value for t in s.terms() if t.kind == "var"}
    if isinstance(s, Comparison):
        return {s.var.value}
    if isinstance(s, NotEqual):
        return {s.var.value}
    if isinstance(s, NotExists):
        return set().union(*[_statement_vars(x) for x in s.statements]) if s.statements else set()
    if isinstance(s, UnionBlock):
        out: set[str] = set()
        for b in s.branches:
            for x in b:
                out |= _statement_vars(x)
        return out
    return set()


def _has_grounding(s: Statement) -> bool:
    if isinstance(s, Triple):
        return any(t.is_grounded for t in s.terms())
    if isinstance(s, UnionBlock):
        return any(_has_grounding(x) for b in s.branches for x in b)
    return False


def _order_key(s: Statement) -> str:
    if isinstance(s, Triple):
        return s.predicate
    if isinstance(s, UnionBlock):
        preds = [t.predicate for b in s.branches for t in b if isinstance(t, Triple)]
        return min(preds) if preds else "~"
    return "~"  # filters are placed by their variable, key only breaks exotic ties


def dependency_order(statements: tuple) -> list[Statement]:
    """Deterministic statement order: grounded statements seed the frontier,
    connected ones follow, predicate string breaks ties.  Filters trail the
    statement that binds their variable."""
    triple_like = [s for s in statements if isinstance(s, (Triple, UnionBlock))]
    filters = [s for s in statements if not isinstance(s, (Triple, UnionBlock))]
    placed: list[Statement] = []
    remaining = list(triple_like)
    bound: set[str] = set()
    while remaining:
        eligible = [
            s for s in remaining if _has_grounding(s) or (_statement_vars(s) & bound)
        ]
        if not eligible:  # disconnected remainder: fall back to key order
            eligible = remaining
        pick = min(eligible, key=_order_key)
        remaining.remove(pick)
        placed.append(pick)
        bound |= _statement_vars(pick)

    ordered: list[Statement] = []
    pending = list(filters)
    for s in placed:
        ordered.append(s)
        svars = _statement_vars(s)
        still = []
        for f in pending:
            fvars = _statement_vars(f)
            if fvars and fvars <= {v for p in ordered for v in _statement_vars(p)} and fvars & svars:
                ordered.append(f)
            else:
                still.append(f)
        pending = still
    ordered.extend(pending)
    return ordered


def _numeric_vars(lf: LogicalForm) -> set[str]:
    out = set()
    for s in lf.statements:
        if isinstance(s, Comparison):
            out.add(s.var.value)
    if lf.sort:
        out.add(lf.sort.var.value)
    return out


def answer_variable(lf: LogicalForm) -> str:
    """The projected variable.  CWQ-style forms always project `?x`; when no
    `x` exists we fall back to the variable whose last occurrence is latest in
    dependency order (the free end of a chain)."""
    variables = lf.variables()
    if not variables:
        raise UnboundVariable("x")
    if "x" in variables:
        return "x"
    numeric = _numeric_vars(lf)
    ordered = dependency_order(lf.statements)
    last_at: dict[str, int] = {}
    occurrences: dict[str, int] = {}
    for idx, s in enumerate(ordered):
        for v in _statement_vars(s):
            last_at[v] = idx
            occurrences[v] = occurrences.get(v, 0) + 1
    candidates = [v for v in variables if v not in numeric] or variables
    return max(candidates, key=lambda v: (last_at.get(v, -1), -occurrences.get(v, 0), v))


def canonicalize(lf: LogicalForm) -> LogicalForm:
    """Rename variables onto the fixed alphabet (answer -> ?x, numeric -> ?num,
    others -> ?c ?y ?k ... in first-occurrence order) and reorder statements
    deterministically.  Idempotent; invariant under variable respelling and
    statement permutation."""
    ordered = dependency_order(lf.statements)
    answer = answer_variable(lf)
    numeric = _numeric_vars(lf)

    rename: dict[str, str] = {answer: "x"}
    pool = iter(_CANON_INTERMEDIATES + [f"v{i}" for i in range(4, 20)])

    def visit_term(t: Term):
        if t.kind != "var" or t.value in rename:
            return
        if t.value in numeric:
            rename[t.value] = "num" if "num" not in rename.values() else f"num{len(rename)}"
        else:
            rename[t.value] = next(pool)

    def walk(stmts):
        for s in stmts:
            if isinstance(s, Triple):
                visit_term(s.subject)
                visit_term(s.object)
            elif isinstance(s, Comparison):
                visit_term(s.var)
            elif isinstance(s, NotEqual):
                visit_term(s.var)
                visit_term(s.term)
            elif isinstance(s, NotExists):
                walk(s.statements)
            elif isinstance(s, UnionBlock):
                for b in s.branches:
                    walk(b)

    walk(ordered)
    if lf.sort:
        visit_term(lf.sort.var)

    def sub(t: Term) -> Term:
        return Term.var(rename[t.value]) if t.kind == "var" else t

    def rewrite(s: Statement) -> Statement:
        if isinstance(s, Triple):
            return Triple(sub(s.subject), s.predicate, sub(s.object))
        if isinstance(s, Comparison):
            return Comparison(sub(s.var), s.op, s.value)
        if isinstance(s, NotEqual):
            return NotEqual(sub(s.var), sub(s.term))
        if isinstance(s, NotExists):
            return NotExists(tuple(rewrite(x) for x in s.statements))
        if isinstance(s, UnionBlock):
            return UnionBlock(
                tuple(tuple(rewrite(x) for x in b) for b in s.branches), s.labels
            )
        raise TypeError(type(s))

    sort = None
    if lf.sort:
        sort = SortClause(sub(lf.sort.var), lf.sort.descending, lf.sort.limit)
    return LogicalForm(lf.header, tuple(rewrite(s) for s in ordered), sort)


def em_equal(a: LogicalForm, b: LogicalForm) -> bool:
    """Exact match modulo variable naming and statement order."""
    return serialize(canonicalize(a)) == serialize(canonicalize(b))


# ---------------------------------------------------------------------------
# entity (de)lexicalization


@dataclass(frozen=True)
class Entity:
    surface: str
    kb_id: str


@dataclass
class EntityMap:
    """Placeholder index -> entity; indices are dense from 1."""

    entries: dict[int, Entity] = field(default_factory=dict)

    def add(self, surface: str, kb_id: str) -> int:
        idx = len(self.entries) + 1
        self.entries[idx] = Entity(surface, kb_id)
        return idx

    def get(self, index: int) -> Entity:
        if index not in self.entries:
            raise MissingEntity(index)
        return self.entries[index]

    def surface(self, index: int) -> str:
        return self.get(index).surface

    def kb_id(self, index: int) -> str:
        return self.get(index).kb_id

    def index_of_surface(self, surface: str) -> int | None:
        for i in sorted(self.entries):
            if self.entries[i].surface == surface:
                return i
        return None

    def surfaces(self) -> list[str]:
        return [e.surface for e in self.entries.values()]

    def to_json(self) -> dict:
        return {
            str(i): {"surface": e.surface, "kb_id": e.kb_id}
            for i, e in sorted(self.entries.items())
        }

    @staticmethod
    def from_json(obj: dict) -> "EntityMap":
        m = EntityMap()
        for key in sorted(obj, key=int):
            m.entries[int(key)] = Entity(obj[key]["surface"], obj[key]["kb_id"])
        return m

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)

    @staticmethod
    def loads(s: str) -> "EntityMap":
        return EntityMap.from_json(json.loads(s))


def delexicalize(text: str, entities: list[tuple[str, str]]) -> tuple[str, EntityMap]:
    """Replace each entity occurrence with `#entityN#`, numbering occurrences
    in text order (an entity occurring twice gets two indices).  Entities are
    matched as `ns:<kb_id>` tokens, or as bare kb_ids when no prefixed form
    exists."""
    spans: list[tuple[int, int, str, str]] = []  # (start, end, surface, kb_id)
    for surface, kb_id in entities:
        pattern = re.compile(
            r"(?<![\w.])(?:ns:)?" + re.escape(kb_id) + r"(?![\w.])"
        )
        found = list(pattern.finditer(text))
        if not found:
            raise EntityNotFound(kb_id)
        for m in found:
            spans.append((m.start(), m.end(), surface, kb_id))
    spans.sort()
    emap = EntityMap()
    out = []
    prev = 0
    for start, end, surface, kb_id in spans:
        if start < prev:  # overlapping kb_ids (one a substring of another)
            continue
        idx = emap.add(surface, kb_id)
        out.append(text[prev:start])
        out.append(f"#entity{idx}#")
        prev = end
    out.append(text[prev:])
    return "".join(out), emap


def relexicalize(text: str, emap: EntityMap, mode: str = "surface") -> str:
    """Replace placeholders by entity surfaces (questions) or kb_ids
    (executable forms); raises MissingEntity for unmapped placeholders."""

    def repl(m: re.Match) -> str:
        idx = int(m.group(1))
        e = emap.get(idx)
        return e.surface if mode == "surface" else f"ns:{e.kb_id}"

    return ENTITY_RE.sub(repl, text)
