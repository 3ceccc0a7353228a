"""End-to-end dialogue simulation: decompose predicted and gold parses,
generate oracle feedback, resolve corrections, retry with alternative
candidates, and report exact-match / F1 uplift.

Retries work by candidate-rank advancement: resolutions that left a step
different from gold are added to the state's rejected set, so the next
attempt's resolution picks the next-ranked candidate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

from .corpus import TemplateCorpus
from .correct import (
    CorrectionModel,
    DialogueState,
    apply_op,
    compile_state,
    new_state,
    parse_feedback,
)
from .decompose import component_signature, decompose
from .errors import MissingId, SubquestError
from .lf import EntityMap, LogicalForm, em_equal, parse_lf
from .metrics import answer_f1, format_table
from .models import FeedbackGenerator, OracleFeedback, OracleModel, TemplateInverseModel


@dataclass
class TurnRecord:
    turn: int  # 1-based cumulative op index within the dialogue
    attempt: int
    utterance: str
    ok: bool


@dataclass
class DialogueOutcome:
    dialogue_id: str
    em_pre: bool
    em_post: bool
    attempts_used: int
    turns: list = field(default_factory=list)
    f1_pre: float | None = None
    f1_post: float | None = None
    error: str | None = None


@dataclass
class SimulationReport:
    n_dialogues: int = 0
    n_failures: int = 0
    em_pre: float = 0.0
    em_post: float = 0.0
    f1_pre: float | None = None
    f1_post: float | None = None
    per_turn: dict = field(default_factory=dict)  # turn -> (ratio, count)
    attempts_histogram: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n_dialogues": self.n_dialogues,
            "n_failures": self.n_failures,
            "em_pre": self.em_pre,
            "em_post": self.em_post,
            "f1_pre": self.f1_pre,
            "f1_post": self.f1_post,
            "per_turn": {str(k): {"accuracy": v[0], "count": v[1]}
                         for k, v in sorted(self.per_turn.items())},
            "attempts_histogram": {str(k): v for k, v in sorted(self.attempts_histogram.items())},
        }

    def table(self) -> str:
        rows = [("metric", "value")]
        rows.append(("dialogues", str(self.n_dialogues)))
        rows.append(("failures", str(self.n_failures)))
        rows.append(("EM (before)", f"{self.em_pre:.3f}"))
        rows.append(("EM (after)", f"{self.em_post:.3f}"))
        if self.f1_pre is not None:
            rows.append(("F1 (before)", f"{self.f1_pre:.3f}"))
            rows.append(("F1 (after)", f"{self.f1_post:.3f}"))
        for k, (ratio, count) in sorted(self.per_turn.items()):
            rows.append((f"turn-{k} accuracy ({count})", f"{ratio:.3f}"))
        for k, v in sorted(self.attempts_histogram.items()):
            rows.append((f"attempts={k}", str(v)))
        return format_table(rows)


def simulate_dialogue(pred_lf: LogicalForm | str, gold_lf: LogicalForm | str,
                      emap: EntityMap, corpus: TemplateCorpus,
                      gen: FeedbackGenerator, model: CorrectionModel,
                      max_attempts: int = 1, question: str = "", store=None,
                      dialogue_id: str = "") -> tuple[DialogueState, DialogueOutcome]:
    pred = parse_lf(pred_lf) if isinstance(pred_lf, str) else pred_lf
    gold = parse_lf(gold_lf) if isinstance(gold_lf, str) else gold_lf
    gold_d = decompose(gold, corpus)
    gold_sigs = {repr(component_signature(c, emap)) for c in gold_d.components}
    if gold_d.sort_step is not None:
        gold_sigs.add(("sortintent", gold_d.sort_step.descending))

    state = new_state(question, pred, emap, corpus, store)
    outcome = DialogueOutcome(dialogue_id, em_pre=em_equal(pred, gold), em_post=False,
                              attempts_used=0)
    if outcome.em_pre:
        outcome.em_post = True
        return state, outcome

    turn = 0
    for attempt in range(1, max_attempts + 1):
        try:
            utterances = gen.next_ops(state, gold_d, attempt)
        except SubquestError as exc:
            outcome.error = f"{exc.kind}: {exc}"
            break
        if not utterances:
            break
        failed = False
        for utterance in utterances:
            turn += 1
            try:
                op = parse_feedback(utterance)
                before = len(state.resolutions)
                state = apply_op(state, op, model)
                new_res = state.resolutions[before:]
                ok = all(sig in gold_sigs or _sort_sig_ok(sig, gold_d) for _, sig in new_res)
                outcome.turns.append(TurnRecord(turn, attempt, utterance, ok))
            except SubquestError as exc:
                outcome.turns.append(TurnRecord(turn, attempt, utterance, False))
                outcome.error = f"{exc.kind}: {exc}"
                failed = True
                break
        state = dc_replace(state, attempts_used=attempt)
        outcome.attempts_used = attempt
        if not failed:
            try:
                compiled = compile_state(state)
                if em_equal(compiled, gold):
                    outcome.em_post = True
                    break
            except SubquestError as exc:
                outcome.error = f"{exc.kind}: {exc}"
        # candidate-rank advancement: reject resolutions that diverged from gold
        bad = tuple((q, sig) for q, sig in state.resolutions
                    if sig not in gold_sigs and not _sort_sig_ok(sig, gold_d)
                    and (q, sig) not in state.rejected)
        if bad:
            state = dc_replace(state, rejected=state.rejected + bad)
    return state, outcome


def _sort_sig_ok(sig, gold_d) -> bool:
    if not isinstance(sig, tuple) or not sig or sig[0] != "sortintent":
        return False
    return gold_d.sort_step is not None and sig[1] == gold_d.sort_step.descending


# ---------------------------------------------------------------------------
# suite runner


@dataclass
class SimConfig:
    corpus: TemplateCorpus
    store: object = None
    model: str = "oracle"  # 'oracle' | 'template-inverse' | 'remote:<url>'
    max_attempts: int = 1


def make_model(config: SimConfig, gold_d, emap) -> CorrectionModel:
    if config.model == "oracle":
        return OracleModel(gold_d, emap, config.corpus)
    if config.model == "template-inverse":
        return TemplateInverseModel(config.corpus)
    if config.model.startswith("remote:"):
        from .gateway.remote import RemoteCorrectionModel

        return RemoteCorrectionModel(config.model[len("remote:"):], config.corpus)
    raise ValueError(f"unknown correction model {config.model!r}")


def load_jsonl(path: str | Path) -> dict[str, dict]:
    out: dict[str, dict] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out[str(rec["id"])] = rec
    return out


def run_suite(pred_path: str | Path, gold_path: str | Path, config: SimConfig) -> SimulationReport:
    preds = load_jsonl(pred_path)
    golds = load_jsonl(gold_path)
    report = SimulationReport()
    outcomes: list[DialogueOutcome] = []
    f1_pre_vals: list[float] = []
    f1_post_vals: list[float] = []

    for did, pred_rec in preds.items():
        if did not in golds:
            raise MissingId(did, str(gold_path))
        gold_rec = golds[did]
        emap = EntityMap.from_json(gold_rec.get("entities", {}))
        try:
            gold_lf = parse_lf(gold_rec["lf"])
            gold_d = decompose(gold_lf, config.corpus)
            gen = OracleFeedback(config.corpus)
            model = make_model(config, gold_d, emap)
            state, outcome = simulate_dialogue(
                pred_rec["lf"], gold_lf, emap, config.corpus, gen, model,
                max_attempts=config.max_attempts,
                question=gold_rec.get("question", ""), store=config.store,
                dialogue_id=did,
            )
        except SubquestError as exc:
            outcome = DialogueOutcome(did, em_pre=False, em_post=False, attempts_used=0,
                                      error=f"{exc.kind}: {exc}")
            state = None
        outcomes.append(outcome)
        if config.store is not None and gold_rec.get("answers"):
            gold_answers = set(gold_rec["answers"])
            f1_pre_vals.append(_execution_f1(pred_rec["lf"], emap, config, gold_answers))
            if state is not None:
                try:
                    compiled = compile_state(state)
                    f1_post_vals.append(_execution_f1(compiled, emap, config, gold_answers))
                except SubquestError:
                    f1_post_vals.append(0.0)
            else:
                f1_post_vals.append(0.0)

    report.n_dialogues = len(outcomes)
    report.n_failures = sum(1 for o in outcomes if o.error is not None)
    if outcomes:
        report.em_pre = sum(o.em_pre for o in outcomes) / len(outcomes)
        report.em_post = sum(o.em_post for o in outcomes) / len(outcomes)
    if f1_pre_vals:
        report.f1_pre = sum(f1_pre_vals) / len(f1_pre_vals)
        report.f1_post = sum(f1_post_vals) / len(f1_post_vals)
    turn_hits: dict[int, list[bool]] = {}
    for o in outcomes:
        for t in o.turns:
            turn_hits.setdefault(t.turn, []).append(t.ok)
    report.per_turn = {k: (sum(v) / len(v), len(v)) for k, v in sorted(turn_hits.items())}
    for o in outcomes:
        report.attempts_histogram[o.attempts_used] = report.attempts_histogram.get(o.attempts_used, 0) + 1
    return report


def _execution_f1(lf, emap: EntityMap, config: SimConfig, gold_answers: set) -> float:
    from .kb import eval_decomposition

    try:
        parsed = parse_lf(lf) if isinstance(lf, str) else lf
        d = decompose(parsed, config.corpus)
        _, final = eval_decomposition(config.store, d, emap)
        return answer_f1(final.values, gold_answers)
    except SubquestError:
        return 0.0
    except Exception:
        return 0.0
