"""Independent oracles the test suite checks the implementation against.
These deliberately use the dumbest correct algorithms available."""
from __future__ import annotations

from itertools import product

from subquest.decompose import Component
from subquest.kb import AnswerSet, TripleStore
from subquest.lf import Comparison, NotEqual, NotExists, Triple


def dp_levenshtein(a: str, b: str) -> int:
    """Full-matrix textbook edit distance."""
    m, n = len(a), len(b)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[m][n]


def _stmt_vars(stmts) -> list[str]:
    seen: list[str] = []

    def walk(ss):
        for s in ss:
            if isinstance(s, Triple):
                for t in s.terms():
                    if t.kind == "var" and t.value not in seen:
                        seen.append(t.value)
            elif isinstance(s, (Comparison, NotEqual)):
                if s.var.value not in seen:
                    seen.append(s.var.value)
            elif isinstance(s, NotExists):
                walk(s.statements)

    walk(stmts)
    return seen


def _ground(term, env, emap):
    if term.kind == "var":
        return env[term.value]
    if term.kind == "entity":
        return emap.kb_id(term.value)
    return term.value


def _holds(stmts, env, store: TripleStore, emap) -> bool:
    for s in stmts:
        if isinstance(s, Triple):
            if (_ground(s.subject, env, emap), s.predicate, _ground(s.object, env, emap)) \
                    not in store.triples:
                return False
        elif isinstance(s, Comparison):
            v = env[s.var.value]
            if isinstance(v, str):
                return False
            if not (v > s.value if s.op == ">" else v < s.value):
                return False
        elif isinstance(s, NotEqual):
            if env[s.var.value] == _ground(s.term, env, emap):
                return False
        elif isinstance(s, NotExists):
            raise NotImplementedError("brute force skips not-exists")
    return True


def brute_force_component(store: TripleStore, comp: Component, inputs, emap) -> AnswerSet:
    """Try every assignment of store constants to the component's variables."""
    consts = sorted(store.constants(), key=lambda v: (str(type(v)), str(v)))
    if comp.kind == "union":
        all_stmts = [list(b) for b in comp.block.branches]
        variables = _stmt_vars([s for b in comp.block.branches for s in b])
    else:
        all_stmts = [list(comp.triples)]
        variables = _stmt_vars(comp.triples)
    extra = []
    if comp.restriction is not None:
        extra.append(comp.restriction)
    extra.extend(comp.filters)
    for v in _stmt_vars(extra):
        if v not in variables:
            variables.append(v)

    seed = None
    in_var = None
    if comp.input_term is not None and comp.input_term.kind == "var":
        in_var = comp.input_term.value
        if isinstance(inputs, AnswerSet):
            seed = inputs.values
        elif inputs is not None:
            seed = {inputs}

    out_var = comp.output_var.value if comp.output_var is not None and comp.output_var.kind == "var" else None
    num_var = comp.numeric_var.value if comp.numeric_var is not None else None
    result = AnswerSet()
    for assignment in product(consts, repeat=len(variables)):
        env = dict(zip(variables, assignment))
        if in_var is not None and seed is not None and env.get(in_var) not in seed:
            continue
        if comp.kind == "union":
            if not any(_holds(branch, env, store, emap) for branch in all_stmts):
                continue
        else:
            if not _holds(all_stmts[0], env, store, emap):
                continue
        if not _holds(extra, env, store, emap):
            continue
        if out_var is None or out_var not in env:
            continue
        v = env[out_var]
        result.values.add(v)
        if num_var is not None and num_var != out_var and num_var in env:
            result.add_key(v, env[num_var])
    return result
