"""Error taxonomy shared by every module.

Each error carries a stable ``code`` string (its class name) which the HTTP
layer echoes verbatim in ``{code, message}`` bodies, so clients and tests can
match on codes instead of prose.
"""


class CoachError(Exception):
    """Base class; ``code`` is the stable wire identifier."""

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__

    @property
    def code(self) -> str:
        return self.__class__.__name__


# -- domain validation ------------------------------------------------------

class FieldOutOfRange(CoachError):
    def __init__(self, field: str, detail: str = ""):
        super().__init__(f"field {field!r} out of range{': ' + detail if detail else ''}")
        self.field = field


class UnknownTag(CoachError):
    def __init__(self, tag: str, field: str = ""):
        super().__init__(f"unknown tag {tag!r}" + (f" in {field}" if field else ""))
        self.tag = tag


class MalformedWeek(CoachError):
    pass


class UnknownActivity(CoachError):
    pass


# -- knn / features ---------------------------------------------------------

class EmptyTrainingSet(CoachError):
    pass


class SchemaMismatch(CoachError):
    pass


# -- adherence --------------------------------------------------------------

class InsufficientDays(CoachError):
    pass


class DateOutOfPlan(CoachError):
    pass


class UnknownPlan(CoachError):
    pass


# -- planning ---------------------------------------------------------------

class OverlapViolation(CoachError):
    pass


class NoFeasibleActivity(CoachError):
    def __init__(self, kind: str = ""):
        super().__init__(f"no feasible activity{' of kind ' + kind if kind else ''}")
        self.kind = kind


# -- scheduling -------------------------------------------------------------

class DuplicateEnqueue(CoachError):
    pass


# -- bot gateway ------------------------------------------------------------

class MalformedUpdate(CoachError):
    pass


class BadCallbackData(CoachError):
    pass


class UnknownChat(CoachError):
    pass


# -- caregiver service ------------------------------------------------------

class DuplicateChat(CoachError):
    pass


class UnknownUser(CoachError):
    pass


class UnknownTemplate(CoachError):
    pass


class NoAssignedPlan(CoachError):
    pass


class EmptyBroadcast(CoachError):
    pass


# -- persistence ------------------------------------------------------------

class StorageFailure(CoachError):
    pass


class PayloadInvalid(CoachError):
    pass


class CorruptLine(CoachError):
    def __init__(self, seq: int, message: str = ""):
        super().__init__(message or f"corrupt event line at seq {seq}")
        self.seq = seq
        # replaying the prefix up to seq - 1 is always safe
        self.last_good_seq = seq - 1


class VersionMismatch(CoachError):
    pass


# -- simulator --------------------------------------------------------------

class BadMix(CoachError):
    pass


class ConfigInvalid(CoachError):
    pass
