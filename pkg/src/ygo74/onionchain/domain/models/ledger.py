"""Ledger domain models."""
from enum import Enum
from typing import List, Optional
from pydantic import BaseModel, ConfigDict, Field

from ..codec import Tag, decode_int, decode_text, encode_fields, encode_int, encode_text, expect_fields
from .crypto import Digest, Signature


class TransactionKind(str, Enum):
    """Kinds of records the permissioned chain holds."""

    REGISTRATION = "Registration"
    CONFLICTION = "Confliction"
    EVIDENCE = "Evidence"
    DISCLOSURE_REQUEST = "DisclosureRequest"
    DISCLOSURE_VOTE = "DisclosureVote"
    PLEA = "Plea"
    CONFESSION = "Confession"


class Transaction(BaseModel):
    """Ledger transaction.

    Attributes:
        kind (TransactionKind): Record kind
        payload (bytes): Canonical payload bytes
        submitter (str): Submitting party id
        handle (Digest): Digest of the canonical transaction bytes
    """
    model_config = ConfigDict(frozen=True)

    kind: TransactionKind
    payload: bytes
    submitter: str
    handle: Digest

    @staticmethod
    def canonical_body(kind: TransactionKind, payload: bytes, submitter: str) -> bytes:
        """Bytes the handle is computed over."""
        return encode_fields([
            (Tag.KIND, encode_text(kind.value)),
            (Tag.PAYLOAD, payload),
            (Tag.SUBMITTER, encode_text(submitter)),
        ])

    def to_canonical(self) -> bytes:
        return self.canonical_body(self.kind, self.payload, self.submitter)

    @property
    def priority(self) -> int:
        """Sort key for block assembly; conflictions go first."""
        return 0 if self.kind == TransactionKind.CONFLICTION else 1


class BlockHeader(BaseModel):
    """Block header.

    Attributes:
        prev_hash (Digest): Digest of the previous header, zero for genesis
        merkle_root (Digest): Merkle root over the body's handles
        height (int): Position in the chain
        timestamp (int): Milliseconds on the ledger clock
        sequencer (str): Miner that sealed the block, empty for genesis
        signature (Optional[Signature]): Sequencer signature over the unsigned header
    """
    model_config = ConfigDict(frozen=True)

    prev_hash: Digest
    merkle_root: Digest
    height: int = Field(ge=0)
    timestamp: int = Field(ge=0)
    sequencer: str = ""
    signature: Optional[Signature] = None

    def unsigned_bytes(self) -> bytes:
        """Canonical bytes the sequencer signs."""
        return encode_fields([
            (Tag.PREV_HASH, self.prev_hash.hash_bytes),
            (Tag.MERKLE_ROOT, self.merkle_root.hash_bytes),
            (Tag.HEIGHT, encode_int(self.height)),
            (Tag.TIMESTAMP, encode_int(self.timestamp)),
            (Tag.SEQUENCER, encode_text(self.sequencer)),
        ])

    def to_canonical(self) -> bytes:
        signature = self.signature.sig_bytes if self.signature else b""
        return encode_fields([
            (Tag.PAYLOAD, self.unsigned_bytes()),
            (Tag.SIGNATURE, signature),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "BlockHeader":
        unsigned, signature = expect_fields(data, [Tag.PAYLOAD, Tag.SIGNATURE])
        prev_hash, merkle_root, height, timestamp, sequencer = expect_fields(
            unsigned, [Tag.PREV_HASH, Tag.MERKLE_ROOT, Tag.HEIGHT, Tag.TIMESTAMP, Tag.SEQUENCER]
        )
        return cls(
            prev_hash=Digest(hash_bytes=prev_hash),
            merkle_root=Digest(hash_bytes=merkle_root),
            height=decode_int(height),
            timestamp=decode_int(timestamp),
            sequencer=decode_text(sequencer),
            signature=Signature(sig_bytes=signature) if signature else None,
        )


class Block(BaseModel):
    """Block: header plus ordered transactions."""
    model_config = ConfigDict(frozen=True)

    header: BlockHeader
    body: List[Transaction] = Field(default_factory=list)
