"""Exception hierarchy shared by all ttscore modules."""


class TTScoreError(Exception):
    """Base class for every error raised by ttscore."""


class ScenarioFormatError(TTScoreError):
    """A scenario document could not be parsed (bad JSON, missing or unknown field)."""


class ScenarioValidationError(TTScoreError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"scenario is invalid:\n{lines}")


class SchemeEvaluationError(TTScoreError):
    """An assertion could not be evaluated at a vertex (bad index, unknown set...)."""


class SchemeViolation(TTScoreError):
    """A forwarding scheme broke determinism or a network constraint at some vertex."""


class ScheduleError(TTScoreError):
    """A TT-schedule does not satisfy the schedule conditions."""


class GenerationError(TTScoreError):
    pass


class CapExceeded(TTScoreError):
    """An exact engine would exceed its configured size cap."""

    def __init__(self, what, cap, estimate=None):
        self.cap = cap
        self.estimate = estimate
        msg = f"{what} exceeds cap {cap}"
        if estimate is not None:
            msg += f" (estimated {estimate})"
        super().__init__(msg)


class UnsupportedModel(TTScoreError):
    """The scenario's fault model is outside what a method supports."""


class ConsistencyError(TTScoreError):
    """An internal cross-check failed; signals a bug rather than bad input."""


class ContractError(TTScoreError):
    """An argument does not satisfy an operation's precondition."""
