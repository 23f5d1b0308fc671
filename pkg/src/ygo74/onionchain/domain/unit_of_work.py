"""Unit of Work pattern for grouping ledger submissions into one block."""
from abc import ABC, abstractmethod


class AbstractUnitOfWork(ABC):
    """Seals its submissions on a clean exit, withdraws them when the block raises."""

    def __enter__(self) -> "AbstractUnitOfWork":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        if exc_type is not None:
            self.rollback()
        else:
            self.commit()

    @abstractmethod
    def commit(self) -> None:
        """Seal everything submitted in the batch."""
        raise NotImplementedError

    @abstractmethod
    def rollback(self) -> None:
        """Withdraw everything submitted in the batch."""
        raise NotImplementedError
