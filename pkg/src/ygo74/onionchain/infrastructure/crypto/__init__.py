"""Cryptographic contracts."""
from .key_agreement import KeyAgreement, negotiate_key
from .primitives import (
    digest,
    generate_keypair,
    generate_symmetric_key,
    sign,
    sign_with,
    sym_decrypt,
    sym_encrypt,
    verify,
)

__all__ = [
    "KeyAgreement", "negotiate_key",
    "digest", "generate_keypair", "generate_symmetric_key", "sign", "sign_with",
    "sym_decrypt", "sym_encrypt", "verify",
]
