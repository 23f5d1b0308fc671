"""Registration domain models."""
from enum import Enum
from typing import Optional
from pydantic import BaseModel, ConfigDict, field_validator

from ..codec import Tag, decode_text, encode_fields, encode_text, expect_fields
from .crypto import Digest, Signature


class Identity(BaseModel):
    """Externally meaningful identity; doubles as the party id."""
    model_config = ConfigDict(frozen=True)

    id_string: str

    @field_validator("id_string")
    @classmethod
    def validate_id_string(cls, v):
        if not v or not v.strip():
            raise ValueError("Identity cannot be empty")
        return v

    def to_canonical(self) -> bytes:
        return encode_fields([(Tag.IDENTITY, encode_text(self.id_string))])


class RegistrationRequest(BaseModel):
    """regReq: public key plus a signature over the identity.

    Attributes:
        public_key (bytes): Verification key to register
        identity (Identity): Identity being claimed
        signature (Signature): Signature over canonical(identity)
    """
    model_config = ConfigDict(frozen=True)

    public_key: bytes
    identity: Identity
    signature: Signature

    def to_canonical(self) -> bytes:
        return encode_fields([
            (Tag.PUBLIC_KEY, self.public_key),
            (Tag.IDENTITY, encode_text(self.identity.id_string)),
            (Tag.SIGNATURE, self.signature.sig_bytes),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "RegistrationRequest":
        public_key, identity, signature = expect_fields(data, [Tag.PUBLIC_KEY, Tag.IDENTITY, Tag.SIGNATURE])
        return cls(
            public_key=public_key,
            identity=Identity(id_string=decode_text(identity)),
            signature=Signature(sig_bytes=signature),
        )


class Confliction(BaseModel):
    """Holder's claim that a key under registration is already theirs."""
    model_config = ConfigDict(frozen=True)

    claimant: str
    disputed_key: bytes

    def to_canonical(self) -> bytes:
        return encode_fields([
            (Tag.PARTY, encode_text(self.claimant)),
            (Tag.PUBLIC_KEY, self.disputed_key),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "Confliction":
        claimant, key = expect_fields(data, [Tag.PARTY, Tag.PUBLIC_KEY])
        return cls(claimant=decode_text(claimant), disputed_key=key)


class RegistrationRecord(BaseModel):
    """Committed registration as seen through lookups."""
    model_config = ConfigDict(frozen=True)

    party_id: str
    public_key: bytes
    handle: Digest
    height: int


class RejectionReason(str, Enum):
    """Why a registration request was rejected."""

    BAD_SIGNATURE = "BadSignature"
    DUPLICATE_KEY = "DuplicateKey"
    IDENTITY_NOT_ALLOWED = "IdentityNotAllowed"


class RegistrationDecision(BaseModel):
    """Outcome of validate_registration."""
    model_config = ConfigDict(frozen=True)

    accepted: bool
    reason: Optional[RejectionReason] = None
    handle: Optional[Digest] = None

    @classmethod
    def accept(cls, handle: Digest) -> "RegistrationDecision":
        return cls(accepted=True, handle=handle)

    @classmethod
    def reject(cls, reason: RejectionReason) -> "RegistrationDecision":
        return cls(accepted=False, reason=reason)
