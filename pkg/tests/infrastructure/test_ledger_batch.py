"""Tests for LedgerBatch and CommitWaiter."""
import pytest

from ygo74.onionchain.domain.exceptions import CommitTimeout, EmptyPending
from ygo74.onionchain.domain.models.ledger import TransactionKind
from ygo74.onionchain.infrastructure.ledger.ledger import Ledger
from ygo74.onionchain.infrastructure.ledger.ledger_batch import LedgerBatch
from ygo74.onionchain.infrastructure.retry.commit_waiter import CommitWaiter


class TestLedgerBatch:
    """Test suite for the batch unit of work."""

    def test_clean_exit_seals_one_block(self, ledger: Ledger, keypairs: dict):
        """Test every batched transaction lands in the same block."""
        # act
        with LedgerBatch(ledger, "alice", keypairs["alice"]) as batch:
            batch.submit(TransactionKind.PLEA, b"p0", "bob")
            batch.submit(TransactionKind.PLEA, b"p1", "bob")

        # assert
        assert batch.block is not None
        assert [tx.handle for tx in batch.block.body] == [tx.handle for tx in batch.transactions]
        assert ledger.height == 2

    def test_exception_withdraws(self, ledger: Ledger, keypairs: dict):
        """Test an exception inside the batch leaves nothing pending."""
        # act
        with pytest.raises(RuntimeError):
            with LedgerBatch(ledger, "alice", keypairs["alice"]) as batch:
                batch.submit(TransactionKind.PLEA, b"p0", "bob")
                raise RuntimeError("abort")

        # assert
        assert ledger.pending == []
        assert ledger.height == 1

    def test_empty_batch_seals_nothing(self, ledger: Ledger, keypairs: dict):
        with LedgerBatch(ledger, "alice", keypairs["alice"]) as batch:
            pass
        assert batch.block is None
        assert ledger.height == 1


class TestCommitWaiter:
    """Test suite for the tenacity-based commit poll."""

    def test_committed_handle_returns_without_sealing(self, ledger: Ledger, mocker):
        # arrange
        produce = mocker.Mock()
        handle = ledger.registration_of("bob").handle

        # act
        CommitWaiter(ledger, produce).wait(handle)

        # assert
        produce.assert_not_called()

    def test_seals_between_polls(self, ledger: Ledger, keypairs: dict, mocker):
        """Test the producer runs once and the second poll sees the commit."""
        # arrange
        tx = ledger.submit(TransactionKind.EVIDENCE, b"ev", "bob")
        produce = mocker.Mock(side_effect=lambda: ledger.commit_pending("alice", keypairs["alice"]))

        # act
        CommitWaiter(ledger, produce, max_attempts=3).wait(tx.handle)

        # assert
        assert produce.call_count == 1
        assert ledger.is_committed(tx.handle)

    def test_times_out(self, ledger: Ledger, mocker):
        """Test exhaustion raises CommitTimeout and empty seals are tolerated."""
        # arrange
        tx = ledger.submit(TransactionKind.EVIDENCE, b"ev", "bob")
        produce = mocker.Mock(side_effect=EmptyPending("nothing"))

        # act & assert
        with pytest.raises(CommitTimeout):
            CommitWaiter(ledger, produce, max_attempts=2).wait(tx.handle)
        assert produce.call_count == 1
