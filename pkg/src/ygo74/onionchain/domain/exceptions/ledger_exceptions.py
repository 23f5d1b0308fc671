from .domain_exception import DomainException


class LedgerError(DomainException):
    """Base class for ledger failures."""

    exit_code = 4


class NotRegistered(LedgerError):
    """Raised when a non-member submits a non-registration transaction."""

    def __init__(self, party_id: str):
        """Initialize exception.

        Args:
            party_id (str): Submitting party
        """
        self.party_id = party_id
        super().__init__(f"Party '{party_id}' is not a registered member")


class DuplicateHandle(LedgerError):
    """Raised when a transaction handle is already pending or committed."""

    def __init__(self, handle_hex: str):
        self.handle_hex = handle_hex
        super().__init__(f"Transaction {handle_hex} already submitted")


class NotMiner(LedgerError):
    """Raised when a party outside the miner set tries to commit a block."""

    def __init__(self, party_id: str):
        self.party_id = party_id
        super().__init__(f"Party '{party_id}' is not in the miner set")


class EmptyPending(LedgerError):
    """Raised when a commit is requested with nothing pending."""
    pass


class TransactionNotFound(LedgerError):
    """Raised when a handle does not resolve to a committed transaction."""

    def __init__(self, handle_hex: str):
        self.handle_hex = handle_hex
        super().__init__(f"Transaction {handle_hex} not found")


class CommitTimeout(LedgerError):
    """Raised when a transaction is still uncommitted after all polls."""

    def __init__(self, handle_hex: str, attempts: int):
        self.handle_hex = handle_hex
        self.attempts = attempts
        super().__init__(f"Transaction {handle_hex} not committed after {attempts} attempts")


class ChainFileError(LedgerError):
    """Raised when a chain file cannot be parsed."""
    pass
