"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed graph, vertex id out of range, violated precondition."""


class ConsistencyError(RuntimeError):
    """An internal object contradicts the graph it claims to describe."""


class StageFailure(RuntimeError):
    """A randomized or greedy construction step gave up; retrying may help.

    `stage` names the step (e.g. "division-1", "link-3", "strong-connect").
    """

    def __init__(self, stage: str, message: str = "", detail: dict | None = None):
        super().__init__(f"[{stage}] {message}" if message else stage)
        self.stage = stage
        self.detail = detail or {}
