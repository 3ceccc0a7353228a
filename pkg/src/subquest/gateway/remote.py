"""HTTP clients for plugging trained models into the correction pipeline.

All three hooks speak the same one-endpoint contract: a JSON POST of the
task inputs returning ranked outputs.  Sub-LFs travel as statement text in
the same syntax logical forms use.
"""
from __future__ import annotations

import requests

from ..corpus import TemplateCorpus
from ..correct import CorrectionModel, DialogueState
from ..decompose import Component, Decomposition, decompose
from ..errors import ResolutionFailed
from ..invert import SortIntent
from ..lf import HEADER_2, parse_lf
from ..metrics import Scorer
from ..models import FeedbackGenerator

TIMEOUT = 30.0


def component_from_text(text: str, corpus: TemplateCorpus) -> Component:
    """Parse a sub-LF statement string into a single component."""
    d = decompose(parse_lf(f"{HEADER_2} {text}"), corpus)
    if len(d.components) != 1:
        raise ValueError(f"sub-LF text holds {len(d.components)} components: {text!r}")
    return d.components[0]


class RemoteCorrectionModel(CorrectionModel):
    def __init__(self, url: str, corpus: TemplateCorpus):
        self.url = url
        self.corpus = corpus

    def resolve(self, question: str, state: DialogueState, position: int | None = None) -> list:
        payload = {
            "task": "resolve",
            "question": question,
            "complex_question": state.complex_question,
            "qtype": state.qtype,
            "position": position,
            "entities": state.entity_map.to_json(),
            "history_q": list(state.history_q),
            "history_lf": list(state.history_lf),
        }
        resp = requests.post(self.url, json=payload, timeout=TIMEOUT)
        resp.raise_for_status()
        body = resp.json()
        out = []
        for cand in body.get("candidates", []):
            if isinstance(cand, dict) and "sort" in cand:
                out.append(SortIntent(bool(cand["sort"].get("descending")),
                                      cand["sort"].get("kind", "number")))
                continue
            text = cand["lf"] if isinstance(cand, dict) else cand
            try:
                out.append(component_from_text(text, self.corpus))
            except Exception:
                continue  # invalid predicates are filtered, not fatal
        if not out:
            raise ResolutionFailed(question, "remote model returned no valid candidate")
        return out


class RemoteFeedbackGenerator(FeedbackGenerator):
    def __init__(self, url: str):
        self.url = url

    def next_ops(self, state: DialogueState, gold: Decomposition, attempt: int) -> list[str]:
        payload = {
            "task": "feedback",
            "attempt": attempt,
            "complex_question": state.complex_question,
            "steps": [s.templated_q for s in state.steps],
            "history_q": list(state.history_q),
            "history_lf": list(state.history_lf),
        }
        resp = requests.post(self.url, json=payload, timeout=TIMEOUT)
        resp.raise_for_status()
        return list(resp.json().get("utterances", []))


class RemoteScorer(Scorer):
    def __init__(self, url: str):
        self.url = url

    def token_logprobs(self, target_tokens: list[str], source_text: str) -> list[float]:
        resp = requests.post(
            self.url,
            json={"task": "token_logprobs", "target": target_tokens, "source": source_text},
            timeout=TIMEOUT,
        )
        resp.raise_for_status()
        probs = resp.json()["logprobs"]
        if len(probs) != len(target_tokens):
            raise ValueError("scorer returned wrong number of log-probabilities")
        return [float(p) for p in probs]
