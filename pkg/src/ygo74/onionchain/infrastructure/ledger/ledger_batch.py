"""Ledger implementation of the Unit of Work pattern."""
import logging
from typing import List, Optional

from ...domain.exceptions.ledger_exceptions import EmptyPending
from ...domain.models.crypto import KeyPair
from ...domain.models.ledger import Block, Transaction, TransactionKind
from ...domain.unit_of_work import AbstractUnitOfWork
from .ledger import Ledger

logger = logging.getLogger(__name__)


class LedgerBatch(AbstractUnitOfWork):
    """Transactions submitted in the batch are sealed as one block on clean exit.

    Attributes:
        block (Optional[Block]): Block sealed by commit()
        transactions (List[Transaction]): Transactions submitted through the batch
    """

    def __init__(self, ledger: Ledger, sequencer: str, sealing_key: KeyPair):
        """Initialize the batch.

        Args:
            ledger (Ledger): Target ledger
            sequencer (str): Miner that seals the block
            sealing_key (KeyPair): Miner's registered key
        """
        self._ledger = ledger
        self._sequencer = sequencer
        self._sealing_key = sealing_key
        self.transactions: List[Transaction] = []
        self.block: Optional[Block] = None

    def submit(self, kind: TransactionKind, payload: bytes, submitter: str) -> Transaction:
        tx = self._ledger.submit(kind, payload, submitter)
        self.transactions.append(tx)
        return tx

    def commit(self) -> None:
        """Seal the pending queue.

        Raises:
            NotMiner: Sequencer cannot seal
        """
        if not self.transactions:
            return
        try:
            self.block = self._ledger.commit_pending(self._sequencer, self._sealing_key)
        except EmptyPending:
            logger.warning(f"Batch of {len(self.transactions)} transactions was rejected entirely")

    def rollback(self) -> None:
        """Withdraw the batch's transactions from the pending queue."""
        if self.transactions:
            logger.warning(f"Withdrawing {len(self.transactions)} batched transactions")
            self._ledger.withdraw([tx.handle for tx in self.transactions])
