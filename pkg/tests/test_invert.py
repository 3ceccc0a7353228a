import pytest

from subquest.corpus import NUM, PH, RSTR
from subquest.decompose import Component, component_signature, decompose
from subquest.errors import NoTemplateMatch
from subquest.invert import InvertContext, SortIntent, invert
from subquest.lf import EntityMap, Term, Triple, parse_lf
from subquest.render import SORT_SENTENCES, render_all, render_component


def _emap(*pairs):
    m = EntityMap()
    for surface, kb_id in pairs:
        m.add(surface, kb_id)
    return m


def _synthetic_component(entry, emap, corpus):
    """Build a minimal component exercising a corpus entry: the slot holds
    entity 1, except <NUM> templates which become a grounded numeric step."""
    if entry.kind == "union":
        from subquest.invert import _build_union

        return _build_union(entry, Term.entity(1), None)
    if NUM in entry.template:
        described, far = Term.entity(1), Term.var("num")
        input_term, output = described, far
    else:
        described, far = Term.var("x"), Term.entity(1)
        input_term, output = far, described
    if entry.answer_side == "object":
        subj, obj = far, described
    else:
        subj, obj = described, far
    if entry.kind == "cvt":
        p1, p2 = entry.key.split("|")
        conn = Term.var("k")
        triples = (Triple(subj, p1, conn), Triple(conn, p2, obj))
    else:
        triples = (Triple(subj, entry.key, obj),)
    numeric = far if far.kind == "var" else None
    return Component(kind=entry.kind, triples=triples, input_term=input_term,
                     output_var=output, numeric_var=numeric)


def test_invert_of_render_identity_over_corpus(corpus):
    """Top-1 inversion reproduces the component for every unique-template
    corpus entry (the corpus lint guarantees uniqueness)."""
    assert corpus.lint() == []
    emap = _emap(("Widget Entity", "m.widget"))
    checked = 0
    for entry in corpus.all_entries():
        comp = _synthetic_component(entry, emap, corpus)
        qtype = "superlative" if NUM in entry.template else "composition"
        text, _ = render_component(comp, qtype, 0, emap, corpus)
        ctx = InvertContext(qtype, 0, None, emap)
        top = invert(text, ctx, corpus)[0]
        assert not isinstance(top, SortIntent)
        assert component_signature(top, emap) == component_signature(comp, emap), entry.key
        checked += 1
    assert checked == len(corpus.all_entries())


def test_invert_top1_on_demo_steps(corpus, demo_cases):
    for case in demo_cases:
        d = decompose(parse_lf(case.lf), corpus)
        emap = case.entity_map()
        qs = render_all(d, emap, corpus)
        for i, comp in enumerate(d.components):
            upstream = None
            if i > 0:
                upstream = d.components[0].output_var if d.qtype in ("conjunction", "comparative") \
                    else d.components[i - 1].output_var
            top = invert(qs[i].text, InvertContext(d.qtype, i, upstream, emap), corpus)[0]
            assert component_signature(top, emap) == component_signature(comp, emap), \
                f"{case.name} step {i + 1}"


def test_first_demo_inversion_matches_spec_example(corpus, demo_cases):
    case = demo_cases[0]
    emap = case.entity_map()
    text = "What is/are the country/countries that contain(s) Al Sharqia Governorate?"
    top = invert(text, InvertContext("composition", 0, None, emap), corpus)[0]
    assert top.kind == "single"
    assert top.triples[0].predicate == "location.country.administrative_divisions"
    assert top.input_term == Term.entity(1)


def test_gibberish_raises(corpus):
    with pytest.raises(NoTemplateMatch):
        invert("gibberish text?", InvertContext("composition", 0, None, EntityMap()), corpus)


def test_missing_question_mark_raises(corpus):
    with pytest.raises(NoTemplateMatch):
        invert("What is/are the country/countries that contain(s) Egypt",
               InvertContext("composition", 0, None, _emap(("Egypt", "m.1"))), corpus)


@pytest.mark.parametrize("direction,kind", list(SORT_SENTENCES))
def test_sort_sentences_invert(corpus, direction, kind):
    sentence = SORT_SENTENCES[(direction, kind)]
    got = invert(sentence, InvertContext("superlative", 2, None, EntityMap()), corpus)
    assert got == [SortIntent(direction == "descending", kind)]


def test_comparison_fill_inverts_to_filter(corpus):
    emap = _emap(("Caribbean", "m.car"))
    text = "Of which, what is/are the country/countries whose calling code is/are greater than 590?"
    ctx = InvertContext("comparative", 1, Term.var("x"), emap)
    top = invert(text, ctx, corpus)[0]
    cmp_f = top.comparison()
    assert cmp_f is not None and cmp_f.op == ">" and cmp_f.value == 590
    assert top.input_term == top.output_var == Term.var("x")


def test_ambiguity_is_ranked_not_fatal(corpus):
    # both the restriction-bearing and plain readings could fire; ranking
    # keeps the structured (restriction-captured) reading first
    emap = _emap(("Caribbean", "m.car"), ("country", "m.cty"))
    text = "Caribbean is/are the location(s) containing what (country)?"
    ctx = InvertContext("comparative", 0, None, emap)
    cands = invert(text, ctx, corpus)
    assert cands, "expected at least one candidate"
    top = cands[0]
    assert top.restriction is not None
    assert top.restriction.predicate == "common.topic.notable_types"


def test_unresolvable_entity_surface_skipped(corpus):
    emap = _emap(("Egypt", "m.1"))
    with pytest.raises(NoTemplateMatch):
        invert("What is/are the country/countries that contain(s) Atlantis?",
               InvertContext("composition", 0, None, emap), corpus)
