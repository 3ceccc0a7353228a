import json

import pytest

from suite_builder import build_suite, write_jsonl
from subquest.corpus import load_default_corpus
from subquest.correct import CorrectionModel, compile_state
from subquest.decompose import decompose
from subquest.errors import MissingId
from subquest.invert import InvertContext, invert
from subquest.lf import EntityMap, canonicalize, em_equal, parse_lf, serialize
from subquest.models import OracleFeedback, OracleModel, TemplateInverseModel
from subquest.simulate import SimConfig, run_suite, simulate_dialogue

CWQ_GOLD = ("<sparql-header-1> ?c ns:location.country.administrative_divisions #entity1# . "
            "?c ns:location.country.official_language ?x .")
CWQ_PRED = ("<sparql-header-1> ?c ns:location.country.administrative_divisions #entity1# . "
            "?c ns:location.country.capital ?x .")


def _emap():
    m = EntityMap()
    m.add("Al Sharqia Governorate", "m.0kfrqv")
    return m


def test_identical_parse_needs_no_feedback(corpus):
    gen = OracleFeedback(corpus)
    gold_d = decompose(parse_lf(CWQ_GOLD), corpus)
    model = OracleModel(gold_d, _emap(), corpus)
    state, outcome = simulate_dialogue(CWQ_GOLD, CWQ_GOLD, _emap(), corpus, gen, model)
    assert outcome.em_pre and outcome.em_post
    assert outcome.attempts_used == 0
    assert outcome.turns == []
    # no-op dialogues leave the parse byte-identical
    assert serialize(compile_state(state)) == serialize(canonicalize(parse_lf(CWQ_GOLD)))


def test_single_swap_fixed_on_first_attempt(corpus):
    gen = OracleFeedback(corpus)
    gold_d = decompose(parse_lf(CWQ_GOLD), corpus)
    model = OracleModel(gold_d, _emap(), corpus)
    state, outcome = simulate_dialogue(CWQ_PRED, CWQ_GOLD, _emap(), corpus, gen, model,
                                       max_attempts=3)
    assert not outcome.em_pre
    assert outcome.em_post
    assert outcome.attempts_used == 1
    assert all(t.ok for t in outcome.turns)


class TopOneWrongModel(CorrectionModel):
    """Top-1 candidate is deliberately wrong; top-2 is the right one.
    Exercises candidate-rank advancement across attempts."""

    def __init__(self, corpus, wrong_question):
        self.inner = TemplateInverseModel(corpus)
        self.corpus = corpus
        self.wrong_question = wrong_question

    def resolve(self, question, state, position=None):
        good = self.inner.resolve(question, state, position)
        bad = self.inner.resolve(self.wrong_question, state, position)
        return [bad[0]] + good


def test_second_ranked_candidate_wins_on_attempt_two(corpus):
    gen = OracleFeedback(corpus)
    model = TopOneWrongModel(
        corpus, "That entity is/are the educational institution with the mascot what?")
    state, outcome = simulate_dialogue(CWQ_PRED, CWQ_GOLD, _emap(), corpus, gen, model,
                                       max_attempts=3)
    assert outcome.em_post
    assert outcome.attempts_used == 2


def test_attempt_budget_exhausted(corpus):
    gen = OracleFeedback(corpus)

    class AlwaysWrong(CorrectionModel):
        def __init__(self):
            self.inner = TemplateInverseModel(corpus)

        def resolve(self, question, state, position=None):
            return self.inner.resolve(
                "That entity is/are the educational institution with the mascot what?",
                state, position)

    state, outcome = simulate_dialogue(CWQ_PRED, CWQ_GOLD, _emap(), corpus, gen,
                                       AlwaysWrong(), max_attempts=2)
    assert not outcome.em_post
    assert outcome.attempts_used == 2


# --- suite ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def suite_files(tmp_path_factory):
    fixtures = build_suite()
    tmp = tmp_path_factory.mktemp("suite")
    gold, pred = tmp / "gold.jsonl", tmp / "pred.jsonl"
    write_jsonl(fixtures, gold, pred)
    return fixtures, gold, pred


def test_run_suite_oracle_reaches_full_em(suite_files):
    fixtures, gold, pred = suite_files
    corpus = load_default_corpus()
    report = run_suite(pred, gold, SimConfig(corpus=corpus, model="oracle", max_attempts=1))
    assert report.n_dialogues == len(fixtures) >= 50
    clean = sum(1 for f in fixtures if f.edits == 0)
    assert report.em_pre == pytest.approx(clean / len(fixtures))
    assert report.em_post == 1.0
    assert report.n_failures == 0
    assert sum(report.attempts_histogram.values()) == report.n_dialogues


def test_per_turn_counts_are_dialogue_tails(suite_files):
    fixtures, gold, pred = suite_files
    corpus = load_default_corpus()
    report = run_suite(pred, gold, SimConfig(corpus=corpus, model="oracle", max_attempts=1))
    counts = [report.per_turn[k][1] for k in sorted(report.per_turn)]
    assert counts == sorted(counts, reverse=True)
    # turn-k count = number of dialogues with >= k correction turns
    turns_per_dialogue = [f for f in fixtures if f.edits > 0]
    assert report.per_turn[1][1] == len(turns_per_dialogue)


def test_em_post_monotone_in_attempts(suite_files):
    fixtures, gold, pred = suite_files
    corpus = load_default_corpus()
    seen = []
    for attempts in (1, 3):
        report = run_suite(pred, gold, SimConfig(corpus=corpus, model="template-inverse",
                                                 max_attempts=attempts))
        seen.append(report.em_post)
    assert seen[1] >= seen[0]


def test_suite_missing_id(tmp_path):
    gold = tmp_path / "gold.jsonl"
    pred = tmp_path / "pred.jsonl"
    record = {"id": "only-in-pred", "lf": CWQ_GOLD, "question": "q",
              "entities": _emap().to_json(), "answers": []}
    pred.write_text(json.dumps(record) + "\n")
    gold.write_text("")
    with pytest.raises(MissingId):
        run_suite(pred, gold, SimConfig(corpus=load_default_corpus()))


def test_suite_counts_per_dialogue_failures(tmp_path):
    corpus = load_default_corpus()
    gold = tmp_path / "gold.jsonl"
    pred = tmp_path / "pred.jsonl"
    records = [
        {"id": "ok", "lf": CWQ_GOLD, "question": "q", "entities": _emap().to_json(), "answers": []},
        {"id": "bad", "lf": CWQ_GOLD, "question": "q", "entities": _emap().to_json(), "answers": []},
    ]
    gold.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    records[1] = {**records[1], "lf": "<sparql-header-1> ?c ns:unknown.pred.here #entity1# ."}
    pred.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    report = run_suite(pred, gold, SimConfig(corpus=corpus, model="oracle"))
    assert report.n_dialogues == 2
    assert report.n_failures == 1
    assert report.em_post == 0.5


def test_suite_reports_f1_with_store(tmp_path, demo_store):
    corpus = load_default_corpus()
    emap = EntityMap()
    emap.add("Al Sharqia Governorate", "Al Sharqia Governorate")
    gold = tmp_path / "gold.jsonl"
    pred = tmp_path / "pred.jsonl"
    record = {"id": "d1", "lf": CWQ_GOLD, "question": "q", "entities": emap.to_json(),
              "answers": ["Modern Standard Arabic"]}
    gold.write_text(json.dumps(record) + "\n")
    pred.write_text(json.dumps({**record, "lf": CWQ_PRED}) + "\n")
    report = run_suite(pred, gold, SimConfig(corpus=corpus, model="oracle", store=demo_store))
    assert report.f1_pre == 0.0  # capital instead of official language
    assert report.f1_post == 1.0
    assert report.em_post == 1.0


def test_report_table_renders(suite_files):
    fixtures, gold, pred = suite_files
    corpus = load_default_corpus()
    report = run_suite(pred, gold, SimConfig(corpus=corpus, model="oracle"))
    table = report.table()
    assert "EM (after)" in table and "1.000" in table
    assert json.dumps(report.to_json())
