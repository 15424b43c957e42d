from __future__ import annotations

from typing import Optional

from .errors import BudgetExhausted


class Budget:
    """Work counter shared by the combinatorial searches.

    Every search step calls :meth:`tick`; once ``limit`` steps are spent the
    search is interrupted with :class:`BudgetExhausted`.  ``limit=None`` means
    unbounded.
    """

    def __init__(self, limit: Optional[int] = 10 ** 6):
        self.limit = limit
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise BudgetExhausted(f"work budget of {self.limit} steps exhausted")

    @property
    def remaining(self) -> Optional[int]:
        return None if self.limit is None else max(self.limit - self.used, 0)


def as_budget(b) -> Budget:
    if isinstance(b, Budget):
        return b
    return Budget(b)
