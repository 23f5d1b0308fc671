from typing import List, Optional

from ..models.crypto import Digest
from .domain_exception import DomainException


class OnionError(DomainException):
    """Base class for message transmitting failures."""

    exit_code = 6


class InsufficientNodes(OnionError):
    """Raised when the membership cannot supply n distinct relays."""

    def __init__(self, available: int, required: int):
        self.available = available
        self.required = required
        super().__init__(f"{available} eligible nodes, {required} relays required")


class NTooSmall(OnionError):
    """Raised when fewer relays than the protocol minimum are requested."""

    def __init__(self, n: int, minimum: int = 3):
        self.n = n
        self.minimum = minimum
        super().__init__(f"Circuit needs at least {minimum} relays, got {n}")


class BadTransmitterSignature(OnionError):
    """Raised when the first relay refuses the transmitter's signature over EV0."""

    def __init__(self, transmitter: str, relay: str):
        self.transmitter = transmitter
        self.relay = relay
        super().__init__(f"Relay '{relay}' rejected the signature of transmitter '{transmitter}'")


class BadPrevSignature(OnionError):
    """Raised when a hop refuses to countersign or endorse evidence content."""

    def __init__(self, signer: str, verifier: str, detail: str = "signature does not verify"):
        self.signer = signer
        self.verifier = verifier
        super().__init__(f"'{verifier}' refused content from '{signer}': {detail}")


class PrevEvidenceNotCommitted(OnionError):
    """Raised when a hop is attempted before the previous evidence is on-chain."""

    def __init__(self, handle_hex: str):
        self.handle_hex = handle_hex
        super().__init__(f"Previous evidence {handle_hex} is not committed")


class StaleMessage(OnionError):
    """Raised when a delivered message fails the freshness check."""

    def __init__(self, timestamp: int, now: int):
        self.timestamp = timestamp
        self.now = now
        super().__init__(f"Message timestamp {timestamp} is stale at {now}")


class MessageDropped(OnionError):
    """Raised when the network dropped a protocol message."""

    def __init__(self, sender: str, recipient: str):
        self.sender = sender
        self.recipient = recipient
        super().__init__(f"Message from '{sender}' to '{recipient}' was dropped")


class TransmitAborted(OnionError):
    """Raised when a transmission stops after a hop failure.

    The evidence committed before the failure stays on the ledger.
    """

    def __init__(self, cause: Exception, committed: Optional[List[Digest]] = None):
        self.cause = cause
        self.committed = list(committed or [])
        super().__init__(f"Transmission aborted after {len(self.committed)} evidence records: {cause}")
        self.exit_code = getattr(cause, "exit_code", OnionError.exit_code)
