class OracleSizeError(ValueError):
    """A brute-force oracle was asked for a problem larger than it supports."""


class InsufficientDataError(ValueError):
    """Too few points for the requested statistic."""


class BudgetExceededError(RuntimeError):
    """An estimator run would exceed the configured evaluation budget."""

    def __init__(self, n_evaluations: int, budget: int):
        self.n_evaluations = n_evaluations
        self.budget = budget
        super().__init__(
            f"run needs {n_evaluations:.3e} circuit evaluations, budget is {budget:.3e}; "
            "raise the budget explicitly to proceed"
        )
