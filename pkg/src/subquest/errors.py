"""Exception taxonomy shared by all modules.

Every error carries a stable machine-readable ``kind`` string so the HTTP
gateway and the CLI can surface it without string matching on messages.
"""


class SubquestError(Exception):
    kind = "Error"

    def payload(self) -> dict:
        return {"kind": self.kind, "message": str(self)}


class LfSyntaxError(SubquestError):
    """Malformed logical-form text."""

    kind = "SyntaxError"

    def __init__(self, position: int, expected: str, found: str = ""):
        self.position = position
        self.expected = expected
        self.found = found
        msg = f"expected {expected} at token {position}"
        super().__init__(msg + (f", found {found!r}" if found else ""))


class UnboundVariable(SubquestError):
    kind = "UnboundVariable"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable ?{name} used in a filter or sort clause but never bound by a triple")


class EntityNotFound(SubquestError):
    kind = "EntityNotFound"

    def __init__(self, kb_id: str):
        self.kb_id = kb_id
        super().__init__(f"entity {kb_id} does not occur in the text")


class MissingEntity(SubquestError):
    kind = "MissingEntity"

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"no entity bound for placeholder #entity{index}#")


class UnknownPredicate(SubquestError):
    kind = "UnknownPredicate"

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"no template for predicate or group {key!r}")


class AmbiguousGrouping(SubquestError):
    kind = "AmbiguousGrouping"

    def __init__(self, var: str, count: int):
        self.var = var
        super().__init__(f"connector variable ?{var} links {count} triples; cannot pair")


class UnclassifiableForm(SubquestError):
    kind = "UnclassifiableForm"


class NoTemplateMatch(SubquestError):
    kind = "NoTemplateMatch"

    def __init__(self, text: str):
        self.text = text
        super().__init__(f"no template matches {text!r}")


class UnrecognizedOperation(SubquestError):
    kind = "UnrecognizedOperation"

    def __init__(self, utterance: str):
        self.utterance = utterance
        super().__init__(f"not a replace/delete/insert utterance: {utterance!r}")


class BadIndex(SubquestError):
    kind = "BadIndex"

    def __init__(self, raw: str):
        self.raw = raw
        super().__init__(f"bad question index {raw!r}")


class IndexOutOfRange(SubquestError):
    kind = "IndexOutOfRange"

    def __init__(self, index: int, count: int):
        self.index = index
        self.count = count
        super().__init__(f"question #{index} does not exist ({count} steps shown)")


class ResolutionFailed(SubquestError):
    kind = "ResolutionFailed"

    def __init__(self, question: str, reason: str = "no acceptable candidate"):
        self.question = question
        super().__init__(f"could not resolve {question!r}: {reason}")


class DisconnectedComponents(SubquestError):
    kind = "DisconnectedComponents"


class MultipleAnswerVars(SubquestError):
    kind = "MultipleAnswerVars"


class StoreParseError(SubquestError):
    kind = "ParseError"

    def __init__(self, line_no: int, line: str):
        self.line_no = line_no
        super().__init__(f"bad store line {line_no}: {line!r}")


class TypeMismatch(SubquestError):
    kind = "TypeMismatch"


class ScorerFailure(SubquestError):
    kind = "ScorerFailure"

    def __init__(self, item_id, cause: Exception):
        self.item_id = item_id
        self.cause = cause
        super().__init__(f"scorer failed on item {item_id}: {cause}")


class UnlabeledItem(SubquestError):
    kind = "UnlabeledItem"


class MissingId(SubquestError):
    kind = "MissingId"

    def __init__(self, dialogue_id: str, where: str):
        self.dialogue_id = dialogue_id
        super().__init__(f"id {dialogue_id!r} missing from {where}")
