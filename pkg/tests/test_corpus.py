import pytest

from subquest.corpus import TemplateEntry, load_corpus, load_default_corpus, union_signature


def test_default_corpus_loads_and_lints_clean(corpus):
    assert len(corpus.entries) >= 25
    assert len(corpus.union_groups) >= 2
    assert len(corpus.mini) >= 2
    assert corpus.lint() == []


def test_cvt_pairs_subset_of_entry_keys(corpus):
    for pair in corpus.cvt_pairs:
        assert "|".join(pair) in corpus.entries


def test_restriction_preds_disjoint_from_entries(corpus):
    assert not corpus.restriction_preds & set(corpus.entries)


def test_union_signature_sorted():
    assert union_signature(["b.b.b", "a.a.a"]) == "a.a.a|b.b.b"


def test_template_entry_requires_single_slot():
    with pytest.raises(ValueError):
        TemplateEntry("k.k.k", "no slot at all", "subject", "single")
    with pytest.raises(ValueError):
        TemplateEntry("k.k.k", "two <PH> slots <PH>", "subject", "single")


def test_load_rejects_bad_kind(tmp_path):
    f = tmp_path / "corpus.tsv"
    f.write_text("a.b.c\tthe thing <PH>\tsubject\tnonsense\n")
    with pytest.raises(ValueError):
        load_corpus(f)


def test_load_rejects_wrong_column_count(tmp_path):
    f = tmp_path / "corpus.tsv"
    f.write_text("a.b.c\tonly two columns\n")
    with pytest.raises(ValueError):
        load_corpus(f)


def test_flags_parse_wh_and_pattern(corpus):
    entries = [e for e in corpus.union_groups.values() if e.wh != "What is/are"]
    assert entries, "expected a union group with a custom interrogative"
    assert all(e.pattern for e in corpus.union_groups.values())


def test_comment_and_blank_lines_skipped(tmp_path):
    f = tmp_path / "corpus.tsv"
    f.write_text("# header comment\n\na.b.c\tthe thing <PH>\tsubject\tsingle\n")
    c = load_corpus(f)
    assert list(c.entries) == ["a.b.c"]
