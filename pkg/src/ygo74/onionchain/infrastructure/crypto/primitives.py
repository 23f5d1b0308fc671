"""Signing, authenticated encryption and hashing behind semantic operations."""
import hashlib
import logging
import os
import random
from typing import Optional, Union

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ...config.settings import settings
from ...domain.exceptions.crypto_exceptions import AuthenticationFailure
from ...domain.models.crypto import Digest, KeyPair, KeyPurpose, Signature, SymmetricKey

logger = logging.getLogger(__name__)

ED25519 = "ed25519"
ECDSA_P256 = "ecdsa-p256"
NONCE_BYTES = 12
TAG_BYTES = 16

Seed = Union[int, bytes, str]


def _seed_bytes(seed: Seed) -> bytes:
    if isinstance(seed, int):
        seed = seed.to_bytes(16, "big", signed=True)
    elif isinstance(seed, str):
        seed = seed.encode("utf-8")
    return hashlib.sha256(b"onionchain/keygen/" + seed).digest()


def random_bytes(length: int, rng: Optional[random.Random] = None) -> bytes:
    """Random bytes from rng when given (reproducible runs), from the OS otherwise."""
    if rng is None:
        return os.urandom(length)
    return rng.getrandbits(8 * length).to_bytes(length, "big")


def generate_keypair(seed: Optional[Seed] = None,
                     rng: Optional[random.Random] = None,
                     scheme: Optional[str] = None) -> KeyPair:
    """Create a signing key pair.

    Args:
        seed (Optional[Seed]): Deterministic seed; identical seeds give identical pairs
        rng (Optional[random.Random]): Source of randomness when no seed is given
        scheme (Optional[str]): ed25519 or ecdsa-p256, configured scheme by default

    Returns:
        KeyPair: Raw public and secret key bytes
    """
    scheme = scheme or settings.crypto.signature_scheme
    material = _seed_bytes(seed) if seed is not None else random_bytes(32, rng)

    if scheme == ED25519:
        private_key = Ed25519PrivateKey.from_private_bytes(material)
        public_bytes = private_key.public_key().public_bytes(
            encoding=serialization.Encoding.Raw,
            format=serialization.PublicFormat.Raw,
        )
        return KeyPair(public_key=public_bytes, secret_key=material, scheme=scheme)

    if scheme == ECDSA_P256:
        order = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
        scalar = int.from_bytes(material, "big") % (order - 1) + 1
        private_key = ec.derive_private_key(scalar, ec.SECP256R1())
        public_bytes = private_key.public_key().public_bytes(
            encoding=serialization.Encoding.X962,
            format=serialization.PublicFormat.CompressedPoint,
        )
        return KeyPair(public_key=public_bytes, secret_key=scalar.to_bytes(32, "big"), scheme=scheme)

    raise ValueError(f"Unsupported signature scheme '{scheme}'")


def sign(secret_key: bytes, message: bytes, scheme: str = ED25519) -> Signature:
    """Sign message bytes.

    Args:
        secret_key (bytes): Secret key bytes from generate_keypair
        message (bytes): Message to sign
        scheme (str): Scheme the secret key belongs to

    Returns:
        Signature: Ed25519 raw signature or DER-encoded ECDSA signature
    """
    if scheme == ED25519:
        return Signature(sig_bytes=Ed25519PrivateKey.from_private_bytes(secret_key).sign(message))
    if scheme == ECDSA_P256:
        private_key = ec.derive_private_key(int.from_bytes(secret_key, "big"), ec.SECP256R1())
        return Signature(sig_bytes=private_key.sign(message, ec.ECDSA(hashes.SHA256())))
    raise ValueError(f"Unsupported signature scheme '{scheme}'")


def sign_with(keypair: KeyPair, message: bytes) -> Signature:
    return sign(keypair.secret_key, message, keypair.scheme)


def verify(public_key: bytes, sig: Signature, message: bytes) -> bool:
    """Check a signature; never raises.

    The scheme follows from the key width: 32 bytes Ed25519, 33 bytes compressed P-256.

    Returns:
        bool: True iff sig was produced by the matching secret key over exactly message
    """
    try:
        if len(public_key) == 32:
            Ed25519PublicKey.from_public_bytes(public_key).verify(sig.sig_bytes, message)
            return True
        if len(public_key) == 33:
            point = ec.EllipticCurvePublicKey.from_encoded_point(ec.SECP256R1(), public_key)
            point.verify(sig.sig_bytes, message, ec.ECDSA(hashes.SHA256()))
            return True
    except (InvalidSignature, ValueError, TypeError):
        return False
    return False


def generate_symmetric_key(purpose: KeyPurpose, endpoints: tuple, rng: Optional[random.Random] = None,
                           key_bytes: Optional[int] = None) -> SymmetricKey:
    """Fresh random symmetric key, outside any agreement (tests and bench fixtures)."""
    width = key_bytes or settings.crypto.symmetric_key_bytes
    return SymmetricKey(key_bytes=random_bytes(width, rng), purpose=purpose, endpoints=endpoints)


def sym_encrypt(key: SymmetricKey, plaintext: bytes, rng: Optional[random.Random] = None) -> bytes:
    """AES-GCM encryption bound to the key's purpose.

    Returns:
        bytes: nonce || ciphertext || tag
    """
    nonce = random_bytes(NONCE_BYTES, rng)
    return nonce + AESGCM(key.key_bytes).encrypt(nonce, plaintext, key.purpose.value.encode("ascii"))


def sym_decrypt(key: SymmetricKey, ciphertext: bytes) -> bytes:
    """Reverse sym_encrypt.

    Raises:
        AuthenticationFailure: Wrong key, wrong purpose, truncated or tampered ciphertext
    """
    if len(ciphertext) < NONCE_BYTES + TAG_BYTES:
        raise AuthenticationFailure("Ciphertext shorter than nonce and tag")
    nonce, body = ciphertext[:NONCE_BYTES], ciphertext[NONCE_BYTES:]
    try:
        return AESGCM(key.key_bytes).decrypt(nonce, body, key.purpose.value.encode("ascii"))
    except InvalidTag as exc:
        raise AuthenticationFailure("Authenticated decryption failed") from exc


def digest(message: bytes) -> Digest:
    """SHA-256 digest."""
    return Digest(hash_bytes=hashlib.sha256(message).digest())
