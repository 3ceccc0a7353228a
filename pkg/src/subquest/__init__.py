"""Interactive correction of KBQA logical forms via decomposition into
templated sub-questions with intermediate answers."""

from .corpus import TemplateCorpus, TemplateEntry, load_corpus, load_default_corpus
from .correct import (
    Delete,
    DialogueState,
    EditScript,
    Insert,
    Replace,
    apply_op,
    compile_components,
    compile_state,
    diff_components,
    new_state,
    parse_feedback,
    render_op,
)
from .decompose import Component, Decomposition, classify, component_signature, decompose
from .invert import InvertContext, SortIntent, invert
from .kb import AnswerSet, TripleStore, eval_component, eval_decomposition, load_store
from .lf import (
    EntityMap,
    LogicalForm,
    canonicalize,
    delexicalize,
    em_equal,
    parse_lf,
    relexicalize,
    serialize,
)
from .models import OracleFeedback, OracleModel, TemplateInverseModel
from .render import TemplatedQuestion, render_all, render_step
from .simulate import SimConfig, SimulationReport, run_suite, simulate_dialogue

__version__ = "0.1.0"

__all__ = [
    "AnswerSet",
    "Component",
    "Decomposition",
    "Delete",
    "DialogueState",
    "EditScript",
    "EntityMap",
    "Insert",
    "InvertContext",
    "LogicalForm",
    "OracleFeedback",
    "OracleModel",
    "Replace",
    "SimConfig",
    "SimulationReport",
    "SortIntent",
    "TemplateCorpus",
    "TemplateEntry",
    "TemplateInverseModel",
    "TemplatedQuestion",
    "TripleStore",
    "apply_op",
    "canonicalize",
    "classify",
    "compile_components",
    "compile_state",
    "component_signature",
    "decompose",
    "delexicalize",
    "diff_components",
    "em_equal",
    "eval_component",
    "eval_decomposition",
    "invert",
    "load_corpus",
    "load_default_corpus",
    "load_store",
    "new_state",
    "parse_feedback",
    "parse_lf",
    "relexicalize",
    "render_all",
    "render_op",
    "render_step",
    "run_suite",
    "serialize",
    "simulate_dialogue",
]
