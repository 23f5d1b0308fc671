"""Cryptographic value types."""
from enum import Enum
from typing import Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator


class KeyPurpose(str, Enum):
    """What a negotiated symmetric key may be used for."""

    HOP = "hop-encryption"
    PROOF = "proof"


class KeyPair(BaseModel):
    """Signing key pair of a registered party.

    Attributes:
        public_key (bytes): Verification key bytes
        secret_key (bytes): Signing key bytes, never printed
        scheme (str): Signature scheme the bytes belong to
    """
    model_config = ConfigDict(frozen=True)

    public_key: bytes
    secret_key: bytes = Field(repr=False)
    scheme: str = "ed25519"


class SymmetricKey(BaseModel):
    """Symmetric key shared by two endpoints.

    Attributes:
        key_bytes (bytes): Fixed-width secret
        purpose (KeyPurpose): Hop encryption or proof
        endpoints (Tuple[str, str]): Ordered pair of party ids the key is named after
    """
    model_config = ConfigDict(frozen=True)

    key_bytes: bytes = Field(repr=False)
    purpose: KeyPurpose
    endpoints: Tuple[str, str]

    @field_validator("key_bytes")
    @classmethod
    def validate_key_bytes(cls, v):
        if len(v) not in (16, 24, 32):
            raise ValueError("Symmetric key must be 16, 24 or 32 bytes")
        return v


class Signature(BaseModel):
    """Opaque signature bytes."""
    model_config = ConfigDict(frozen=True)

    sig_bytes: bytes


class Digest(BaseModel):
    """Fixed-width SHA-256 digest."""
    model_config = ConfigDict(frozen=True)

    hash_bytes: bytes

    @field_validator("hash_bytes")
    @classmethod
    def validate_width(cls, v):
        if len(v) != 32:
            raise ValueError("Digest must be 32 bytes")
        return v

    @classmethod
    def zero(cls) -> "Digest":
        return cls(hash_bytes=bytes(32))

    @classmethod
    def from_hex(cls, value: str) -> "Digest":
        return cls(hash_bytes=bytes.fromhex(value))

    def hex(self) -> str:
        return self.hash_bytes.hex()

    def short(self) -> str:
        return self.hash_bytes.hex()[:12]
