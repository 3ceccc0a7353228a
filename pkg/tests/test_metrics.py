import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dp_levenshtein
from subquest.errors import ScorerFailure, UnlabeledItem
from subquest.lf import parse_lf
from subquest.metrics import (
    CleaningItem,
    RankedItem,
    Scorer,
    UnigramScorer,
    answer_f1,
    cleaning_rank,
    corpus_bleu,
    diversity_report,
    exact_match,
    interleave,
    levenshtein,
    mask_entity_tokens,
    precision_at_k,
    rouge_n,
    sequence_score,
    tokenize,
    turn_em,
)

# --- exact match ---------------------------------------------------------------


def test_exact_match_identity_and_renaming():
    a = parse_lf("<sparql-header-1> ?c ns:a.b.c #entity1# . ?c ns:a.b.d ?x .")
    b = parse_lf("<sparql-header-1> ?q ns:a.b.c #entity1# . ?q ns:a.b.d ?x .")
    assert exact_match(a, a) == 1
    assert exact_match(a, b) == 1
    c = parse_lf("<sparql-header-1> ?c ns:a.b.c #entity1# . ?c ns:a.b.e ?x .")
    assert exact_match(a, c) == 0


def test_turn_em_ratio():
    assert turn_em([True, False, True, True]) == 0.75


# --- answer F1 -------------------------------------------------------------------


@pytest.mark.parametrize("pred,gold,score", [
    ({"a", "b"}, {"b", "c"}, 0.5),
    ({"a"}, {"a"}, 1.0),
    ({"a"}, {"b"}, 0.0),
    (set(), set(), 1.0),
    (set(), {"a"}, 0.0),
])
def test_answer_f1(pred, gold, score):
    assert answer_f1(pred, gold) == score


@given(st.sets(st.integers(0, 12)), st.sets(st.integers(0, 12)))
@settings(max_examples=80, deadline=None)
def test_answer_f1_symmetric(a, b):
    assert math.isclose(answer_f1(a, b), answer_f1(b, a))


# --- BLEU -------------------------------------------------------------------------


def test_bleu_identity():
    corpus = ["the cat sat on the mat", "a stitch in time"]
    assert corpus_bleu(corpus, corpus, 4) == pytest.approx(1.0)


def test_bleu_brevity_penalty_hand_computation():
    # candidate = first half of a 4-token reference: all n-gram precisions are
    # 1, so BLEU-2 reduces to the brevity penalty e^(1 - 4/2)
    assert corpus_bleu(["alpha beta"], ["alpha beta gamma delta"], 2) == \
        pytest.approx(math.exp(-1))


def test_bleu_disjoint_hits_smoothing_floor():
    score = corpus_bleu(["x y"], ["a b"], 2)
    assert 0 < score <= 1e-8


def test_bleu_length_mismatch():
    with pytest.raises(ValueError):
        corpus_bleu(["a"], ["a", "b"])


# --- ROUGE -------------------------------------------------------------------------


def test_rouge_direct_count():
    assert rouge_n("a b c", "a b d", 1) == pytest.approx(2 / 3)


def test_rouge_identity():
    assert rouge_n("same words here", "same words here", 2) == 1.0


def test_rouge_entity_masking():
    cand = "who is the wife of #entity3#?"
    ref = "who is the wife of #entity7#?"
    assert rouge_n(cand, ref, 1) < 1.0
    assert rouge_n(cand, ref, 1, mask_entities=True) == 1.0


def test_mask_surfaces():
    assert mask_entity_tokens("Egypt borders Sudan", ("Egypt", "Sudan")) == \
        "#entity# borders #entity#"


# --- diversity -----------------------------------------------------------------------


def test_diversity_hand_computed_example():
    rep = diversity_report(["a b", "a c"])
    uni = rep.per_n[1]
    assert uni.vocab_size == 3
    assert uni.distinct_ratio == pytest.approx(0.75)
    assert uni.unique_count == 2
    assert uni.entropy_bits == pytest.approx(1.5, abs=1e-9)


def test_diversity_single_token_entropy_zero():
    rep = diversity_report(["a a a"])
    assert rep.per_n[1].entropy_bits == 0.0
    assert rep.per_n[1].vocab_size == 1


def test_diversity_avg_length():
    assert diversity_report(["a b", "a b c d"]).avg_length_words == 3.0


def test_diversity_conditional_entropy_bounded():
    sentences = ["the cat sat on the mat", "the dog sat on a log", "a cat and a dog"]
    rep = diversity_report(sentences)
    for n in (2, 3):
        stats = rep.per_n[n]
        assert stats.conditional_entropy_bits is not None
        assert stats.conditional_entropy_bits >= -1e-9
        assert stats.conditional_entropy_bits <= stats.entropy_bits + 1e-9


def test_diversity_empty_corpus_errors():
    with pytest.raises(ValueError):
        diversity_report([])


# --- levenshtein -----------------------------------------------------------------------


@pytest.mark.parametrize("a,b,d", [("kitten", "sitting", 3), ("x", "x", 0), ("", "abc", 3)])
def test_levenshtein_known_values(a, b, d):
    assert levenshtein(a, b) == d


def test_levenshtein_against_dp_oracle_random_pairs():
    rng = random.Random(99)
    alphabet = "abcde"
    for _ in range(1000):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        assert levenshtein(a, b) == dp_levenshtein(a, b)


@given(st.text("abcd", max_size=12), st.text("abcd", max_size=12), st.text("abcd", max_size=12))
@settings(max_examples=120, deadline=None)
def test_levenshtein_is_a_metric(a, b, c):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert (levenshtein(a, b) == 0) == (a == b)
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


# --- cleaning rank -----------------------------------------------------------------------


class FixedScorer(Scorer):
    """Maps exact texts to fixed per-token log-probabilities."""

    def __init__(self, scores: dict):
        self.scores = scores  # text -> total NLL

    def token_logprobs(self, target_tokens, source_text):
        text = " ".join(target_tokens)
        total = self.scores[text]
        n = max(len(target_tokens), 1)
        return [-total / n] * n


def test_cleaning_rank_difference_arithmetic():
    scorer = FixedScorer({"target mr": 7.5, "generated mr": 10.0})
    items = [CleaningItem("a", "src", "target mr", "generated mr")]
    ranked = cleaning_rank(items, scorer)
    assert ranked[0].d_score == pytest.approx(2.5)


def test_identical_pair_ranks_last():
    scorer = UnigramScorer(["alpha beta gamma", "delta epsilon"])
    items = [
        CleaningItem("same", "s", "alpha beta", "alpha beta"),
        CleaningItem("diff", "s", "alpha beta", "unseen words entirely different"),
    ]
    ranked = cleaning_rank(items, scorer)
    assert ranked[-1].id == "same"
    assert ranked[-1].d_score == 0.0 and ranked[-1].edit_distance == 0


def test_unigram_scorer_logprobs_nonpositive():
    scorer = UnigramScorer(["a b c"])
    probs = scorer.token_logprobs(tokenize("a zzz"), "src")
    assert len(probs) == 2 and all(p < 0 for p in probs)
    assert sequence_score(scorer, "a b", "src") > 0


def test_scorer_failure_wraps_id():
    class Broken(Scorer):
        def token_logprobs(self, target_tokens, source_text):
            raise RuntimeError("boom")

    with pytest.raises(ScorerFailure) as err:
        cleaning_rank([CleaningItem("x1", "s", "t", "g")], Broken())
    assert err.value.item_id == "x1"


def test_interleave_spec_example():
    assert interleave(["a", "b"], ["c", "a"]) == ["a", "c", "b"]


# --- precision@k ------------------------------------------------------------------------


def _ranked(labels):
    return [RankedItem(str(i), 1.0, 1, lab) for i, lab in enumerate(labels)]


def test_precision_at_k_examples():
    ranked = _ranked(["inaccurate", "accurate", "inaccurate"])
    assert precision_at_k(ranked, 2) == 0.5
    assert precision_at_k(ranked, 3) == pytest.approx(2 / 3)


def test_precision_at_zero_errors():
    with pytest.raises(ValueError):
        precision_at_k(_ranked(["accurate"]), 0)


def test_precision_unlabeled_errors():
    with pytest.raises(UnlabeledItem):
        precision_at_k(_ranked([None, "accurate"]), 2)
