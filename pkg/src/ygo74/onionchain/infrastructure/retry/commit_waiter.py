"""Wait until a submitted transaction is written onto the chain."""
import logging
from typing import Callable, Optional

from tenacity import RetryCallState, Retrying, retry_if_result, stop_after_attempt

from ...domain.exceptions.ledger_exceptions import CommitTimeout, EmptyPending
from ...domain.models.crypto import Digest
from ...domain.models.ledger import Block
from ..ledger.ledger import Ledger

logger = logging.getLogger(__name__)

BlockProducer = Callable[[], Optional[Block]]


class CommitWaiter:
    """Poll is_committed, letting the sequencer seal a block between polls."""

    def __init__(self, ledger: Ledger, produce_block: BlockProducer, max_attempts: int = 3):
        """Initialize the waiter.

        Args:
            ledger (Ledger): Ledger to poll
            produce_block (BlockProducer): Asks the next miner to seal pending transactions
            max_attempts (int): Polls before giving up
        """
        self.ledger = ledger
        self.produce_block = produce_block
        self.max_attempts = max_attempts

    def wait(self, handle: Digest) -> None:
        """Block until handle is committed.

        Raises:
            CommitTimeout: Still uncommitted (or dropped at admission) after max_attempts polls
        """
        retrying = Retrying(
            stop=stop_after_attempt(self.max_attempts),
            retry=retry_if_result(lambda committed: not committed),
            before_sleep=self._seal_before_next_poll,
            retry_error_callback=lambda state: self._timeout(handle, state),
        )
        retrying(self.ledger.is_committed, handle)

    def _seal_before_next_poll(self, retry_state: RetryCallState) -> None:
        logger.debug(f"Not committed after poll {retry_state.attempt_number}, sealing a block")
        try:
            self.produce_block()
        except EmptyPending:
            pass

    def _timeout(self, handle: Digest, retry_state: RetryCallState) -> None:
        reason = self.ledger.rejected_reason(handle)
        logger.error(
            f"Transaction {handle.short()} not committed after {retry_state.attempt_number} polls"
            + (f" (dropped: {reason})" if reason else "")
        )
        raise CommitTimeout(handle.hex(), retry_state.attempt_number)
