class OrchardKitError(Exception):
    pass


class BudgetExceeded(OrchardKitError):
    """An exhaustive search ran out of its step budget.

    Never a mathematical answer: callers must not read it as "no".
    """

    def __init__(self, what, budget, unit="steps"):
        super().__init__(f"{what}: budget of {budget} {unit} exceeded")
        self.what = what
        self.budget = budget


class ParseError(OrchardKitError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidInput(OrchardKitError):
    pass


class InvalidOrchard(InvalidInput):
    def __init__(self, report):
        super().__init__(f"invalid orchard: {report.clause}: {report.detail}")
        self.report = report


class InvalidBramble(InvalidInput):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ThresholdViolation(OrchardKitError):
    """The active (overridden) thresholds are below what a proof step needs.

    Raised instead of emitting a witness that breaks its stated bound.
    """
