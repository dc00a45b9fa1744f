"""Step budgets for potentially explosive computations.

Every leading-term cancellation in the division algorithm costs one step;
minor expansions in determinant work are also charged here.  Exhausting a
budget raises, and callers surface that as an inconclusive outcome rather
than an answer.
"""

from __future__ import annotations

DEFAULT_STEPS = 10**6


class BudgetExhausted(RuntimeError):
    def __init__(self, limit: int, context: str):
        super().__init__(f"step budget of {limit} exhausted during {context}")
        self.limit = limit
        self.context = context


class Budget:
    __slots__ = ("limit", "used", "context")

    def __init__(self, limit: int = DEFAULT_STEPS, context: str = "computation"):
        if limit <= 0:
            raise ValueError("budget limit must be positive")
        self.limit = limit
        self.used = 0
        self.context = context

    def spend(self, n: int = 1, context: str | None = None):
        self.used += n
        if self.used > self.limit:
            raise BudgetExhausted(self.limit, context or self.context)

    def remaining(self) -> int:
        return max(0, self.limit - self.used)


def ensure_budget(budget: Budget | None, context: str = "computation") -> Budget:
    return budget if budget is not None else Budget(context=context)
