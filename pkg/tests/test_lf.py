import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subquest.errors import EntityNotFound, LfSyntaxError, MissingEntity, UnboundVariable
from subquest.lf import (
    EntityMap,
    LogicalForm,
    canonicalize,
    delexicalize,
    em_equal,
    parse_lf,
    relexicalize,
    serialize,
)

CWQ_LF = ("<sparql-header-1> ?c ns:location.country.administrative_divisions #entity1# . "
          "?c ns:location.country.official_language ?x .")

SUPERLATIVE_LF = ("<sparql-header-2> #entity1# ns:sports.professional_sports_team.draft_picks ?y . "
                  "?y ns:sports.sports_league_draft_pick.player ?x . "
                  "?x ns:sports.pro_athlete.career_start ?num . } order by ?num limit 1")


def test_parse_cwq_example():
    lf = parse_lf(CWQ_LF)
    assert lf.header == "<sparql-header-1>"
    assert len(lf.statements) == 2
    t1 = lf.statements[0]
    assert t1.subject.text() == "?c"
    assert t1.predicate == "location.country.administrative_divisions"
    assert t1.object.text() == "#entity1#"


def test_parse_superlative():
    lf = parse_lf(SUPERLATIVE_LF)
    assert len(lf.statements) == 3
    assert lf.sort is not None
    assert lf.sort.var.text() == "?num"
    assert not lf.sort.descending
    assert lf.sort.limit == 1


def test_parse_empty_is_syntax_error():
    with pytest.raises(LfSyntaxError):
        parse_lf("")


@pytest.mark.parametrize("bad", [
    "no header ?c ns:a.b ?x .",
    "<sparql-header-1>",
    "<sparql-header-1> ?c ns:noDots #entity1# .",
    "<sparql-header-1> ?c ns:a.b.c #entity1# . } order by ?c limit 0",
    "<sparql-header-1> ?c ns:a.b.c #entity1# . filter ( xsd:integer ( ?c ) >= 5 ) .",
])
def test_parse_rejects_malformed(bad):
    with pytest.raises(LfSyntaxError):
        parse_lf(bad)


def test_unbound_filter_variable():
    with pytest.raises(UnboundVariable):
        parse_lf("<sparql-header-2> ?c ns:a.b.c #entity1# . filter ( xsd:integer ( ?num ) > 1 ) .")


def test_serialize_exact_for_cwq_example():
    assert serialize(parse_lf(CWQ_LF)) == CWQ_LF


def test_serialize_superlative_exact():
    assert serialize(parse_lf(SUPERLATIVE_LF)) == SUPERLATIVE_LF


def test_roundtrip_on_demo_fixtures(demo_cases):
    for case in demo_cases:
        lf = parse_lf(case.lf)
        again = parse_lf(serialize(lf))
        assert again == lf, case.name


def test_union_serialization_joins_branches(demo_cases):
    case = next(c for c in demo_cases if c.name == "order_member")
    text = serialize(parse_lf(case.lf))
    assert " } union { " in text
    assert parse_lf(text) == parse_lf(case.lf)


def test_canonicalize_idempotent(demo_cases):
    for case in demo_cases:
        c1 = canonicalize(parse_lf(case.lf))
        assert canonicalize(c1) == c1, case.name


def test_canonicalize_renaming_invariance():
    respelled = CWQ_LF.replace("?c", "?a")
    assert em_equal(parse_lf(CWQ_LF), parse_lf(respelled))


def test_canonicalize_statement_permutations():
    # brute force over statement orderings: all permutations canonicalize equal
    lf = parse_lf(CWQ_LF)
    base = canonicalize(lf)
    stmts = list(lf.statements)
    for perm in itertools.permutations(stmts):
        variant = LogicalForm(lf.header, tuple(perm), lf.sort)
        assert canonicalize(variant) == base


def test_em_equal_is_equivalence_relation(demo_cases):
    forms = [parse_lf(c.lf) for c in demo_cases]
    variants = [parse_lf(serialize(canonicalize(f))) for f in forms]
    for a, b in zip(forms, variants):
        assert em_equal(a, a)
        assert em_equal(a, b) == em_equal(b, a)
    for a, b, c in itertools.product(forms[:3], repeat=3):
        if em_equal(a, b) and em_equal(b, c):
            assert em_equal(a, c)
    for a, b in itertools.combinations(forms, 2):
        assert not em_equal(a, b)


@given(st.permutations(["c", "y", "k", "w"]))
@settings(max_examples=30, deadline=None)
def test_em_invariant_under_intermediate_respelling(names):
    text = ("<sparql-header-1> ?c ns:organization.organization.leadership ?k . "
            "?k ns:organization.leadership.person #entity1# . "
            "?c ns:education.educational_institution.mascot ?x .")
    renamed = text.replace("?c", "?TMP1").replace("?k", "?TMP2")
    renamed = renamed.replace("?TMP1", f"?{names[0]}").replace("?TMP2", f"?{names[1]}")
    assert em_equal(parse_lf(text), parse_lf(renamed))


# --- entity (de)lexicalization ---------------------------------------------


def test_delexicalize_single():
    text = "<sparql-header-1> ?c ns:location.country.administrative_divisions ns:m.0d05w3 ."
    out, emap = delexicalize(text, [("Egypt", "m.0d05w3")])
    assert "#entity1#" in out and "m.0d05w3" not in out
    assert emap.surface(1) == "Egypt"
    assert relexicalize(out, emap, mode="kb_id") == text


def test_delexicalize_orders_by_text_position():
    text = "?a ns:p.q.r ns:m.22 . ?a ns:p.q.s ns:m.11 ."
    out, emap = delexicalize(text, [("B", "m.11"), ("A", "m.22")])
    assert out == "?a ns:p.q.r #entity1# . ?a ns:p.q.s #entity2# ."
    assert emap.surface(1) == "A" and emap.surface(2) == "B"


def test_delexicalize_numbers_repeated_occurrences():
    text = "ns:m.77 ns:a.b.c ?x . ns:m.77 ns:a.b.d ?y ."
    out, emap = delexicalize(text, [("Kim", "m.77")])
    assert out == "#entity1# ns:a.b.c ?x . #entity2# ns:a.b.d ?y ."
    assert emap.surface(1) == emap.surface(2) == "Kim"


def test_delexicalize_unknown_entity():
    with pytest.raises(EntityNotFound):
        delexicalize("?a ns:p.q.r ?b .", [("X", "m.404")])


def test_relexicalize_inverse_roundtrip(demo_cases):
    for case in demo_cases:
        emap = case.entity_map()
        surface_text = relexicalize(case.lf, emap, mode="surface")
        assert "#entity" not in surface_text


def test_relexicalize_without_placeholders_unchanged():
    emap = EntityMap()
    assert relexicalize("nothing here", emap) == "nothing here"


def test_relexicalize_missing_entity():
    emap = EntityMap()
    emap.add("One", "m.1")
    with pytest.raises(MissingEntity):
        relexicalize("#entity2#", emap)


def test_entity_map_json_roundtrip():
    emap = EntityMap()
    emap.add("Egypt", "m.0d05w3")
    emap.add("Cairo", "m.01w2v")
    again = EntityMap.loads(emap.dumps())
    assert again.to_json() == emap.to_json()
    assert emap.dumps() == '{"1": {"surface": "Egypt", "kb_id": "m.0d05w3"}, ' \
                           '"2": {"surface": "Cairo", "kb_id": "m.01w2v"}}'
