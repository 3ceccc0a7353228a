import pytest

from subquest.decompose import decompose
from subquest.lf import EntityMap, parse_lf
from subquest.render import (
    SORT_SENTENCES,
    render_all,
    render_step,
    value_kind,
)


def _decomposition(case, corpus):
    return decompose(parse_lf(case.lf), corpus)


def test_rendered_questions_match_frozen_texts(corpus, demo_cases):
    for case in demo_cases:
        d = _decomposition(case, corpus)
        got = [q.text for q in render_all(d, case.entity_map(), corpus)]
        assert got == case.expected_questions, case.name


def test_rendering_is_deterministic(corpus, demo_cases):
    for case in demo_cases:
        d = _decomposition(case, corpus)
        a = [q.text for q in render_all(d, case.entity_map(), corpus)]
        b = [q.text for q in render_all(d, case.entity_map(), corpus)]
        assert a == b


def test_no_unresolved_slots(corpus, demo_cases):
    for case in demo_cases:
        for q in render_all(_decomposition(case, corpus), case.entity_map(), corpus):
            assert "<PH>" not in q.text
            assert "<RSTR>" not in q.text
            assert "<NUM>" not in q.text
            assert q.text.endswith("?")


def test_step_indices_are_one_based(corpus, demo_cases):
    case = demo_cases[0]
    qs = render_all(_decomposition(case, corpus), case.entity_map(), corpus)
    assert [q.step_index for q in qs] == list(range(1, len(qs) + 1))


def test_restriction_token_deleted_when_absent(corpus):
    lf = parse_lf("<sparql-header-2> #entity1# ns:location.location.contains ?x .")
    emap = EntityMap()
    emap.add("Caribbean", "m.0261m")
    q = render_step(decompose(lf, corpus), 0, emap, corpus)
    assert q.text == "Caribbean is/are the location(s) containing what?"


def test_restriction_mini_template_fills(corpus, demo_cases):
    case = next(c for c in demo_cases if c.name == "calling_code")
    q = render_step(_decomposition(case, corpus), 0, case.entity_map(), corpus)
    assert q.text.endswith("what (country)?")
    assert q.fills["RSTR"] == "(country)"


def test_sort_sentence_table():
    assert SORT_SENTENCES[("ascending", "date")].endswith("earliest date?")
    assert SORT_SENTENCES[("descending", "date")].endswith("latest date?")
    assert SORT_SENTENCES[("ascending", "number")].endswith("smallest value?")
    assert SORT_SENTENCES[("descending", "number")].endswith("largest value?")


@pytest.mark.parametrize("pred,kind", [
    ("sports.pro_athlete.career_start", "date"),
    ("people.person.date_of_birth", "date"),
    ("location.location.population", "number"),
    ("geography.mountain.elevation", "number"),
])
def test_value_kind(pred, kind):
    assert value_kind(pred) == kind


def test_descending_number_sort_sentence(corpus):
    text = ("<sparql-header-2> #entity1# ns:location.location.contains ?x . "
            "?x ns:location.location.population ?num . } order by desc ( ?num ) limit 1")
    emap = EntityMap()
    emap.add("France", "m.0f8l9c")
    qs = render_all(decompose(parse_lf(text), corpus), emap, corpus)
    assert qs[-1].text == "Of these, which is the entity associated with the largest value?"


def test_render_step_out_of_range(corpus, demo_cases):
    case = demo_cases[0]
    d = _decomposition(case, corpus)
    with pytest.raises(IndexError):
        render_step(d, 99, case.entity_map(), corpus)


def test_object_side_template(corpus):
    # entry whose template describes the triple object
    lf = parse_lf("<sparql-header-1> #entity1# ns:internet.website.owner ?x .")
    emap = EntityMap()
    emap.add("example.org", "m.web1")
    q = render_step(decompose(lf, corpus), 0, emap, corpus)
    assert q.text == "What is/are the owner(s) of example.org?"
