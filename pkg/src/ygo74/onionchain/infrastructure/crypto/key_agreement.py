"""Two-message key agreement: X25519 ephemerals expanded with HKDF-SHA256."""
import logging
import random
from typing import Callable, Optional, Tuple

from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from ...config.settings import settings
from ...domain.codec import Tag, decode_int, decode_text, encode_fields, encode_int, encode_text, expect_fields
from ...domain.exceptions.crypto_exceptions import MalformedEncoding
from ...domain.models.crypto import KeyPurpose, SymmetricKey
from .primitives import random_bytes

logger = logging.getLogger(__name__)

Transport = Callable[[bytes], bytes]


def _ephemeral(rng: Optional[random.Random]) -> X25519PrivateKey:
    if rng is None:
        return X25519PrivateKey.generate()
    return X25519PrivateKey.from_private_bytes(random_bytes(32, rng))


def _public_bytes(private_key: X25519PrivateKey) -> bytes:
    return private_key.public_key().public_bytes(
        encoding=serialization.Encoding.Raw,
        format=serialization.PublicFormat.Raw,
    )


def _derive(shared: bytes, hello: bytes, reply_public: bytes, purpose: KeyPurpose,
            endpoints: Tuple[str, str], width: int) -> SymmetricKey:
    info = encode_fields([
        (Tag.PURPOSE, encode_text(purpose.value)),
        (Tag.PARTY, encode_text(endpoints[0])),
        (Tag.PARTY, encode_text(endpoints[1])),
    ])
    key_bytes = HKDF(
        algorithm=hashes.SHA256(),
        length=width,
        salt=hello + reply_public,
        info=b"onionchain/key-agreement/" + info,
    ).derive(shared)
    return SymmetricKey(key_bytes=key_bytes, purpose=purpose, endpoints=endpoints)


class KeyAgreement:
    """Initiator side of the exchange.

    hello = (purpose, endpoints, key width, ephemeral public key); the responder
    answers with its own ephemeral public key. Both derive the same key; a
    passive observer sees only public values.
    """

    def __init__(self, purpose: KeyPurpose, endpoints: Tuple[str, str],
                 key_bytes: Optional[int] = None, rng: Optional[random.Random] = None):
        self.purpose = purpose
        self.endpoints = endpoints
        self.key_bytes = key_bytes or settings.crypto.symmetric_key_bytes
        self._private = _ephemeral(rng)
        self._hello: Optional[bytes] = None

    def hello(self) -> bytes:
        self._hello = encode_fields([
            (Tag.PURPOSE, encode_text(self.purpose.value)),
            (Tag.PARTY, encode_text(self.endpoints[0])),
            (Tag.PARTY, encode_text(self.endpoints[1])),
            (Tag.INDEX, encode_int(self.key_bytes, 4)),
            (Tag.KEY, _public_bytes(self._private)),
        ])
        return self._hello

    def finish(self, reply: bytes) -> SymmetricKey:
        """Derive the key from the responder's reply.

        Raises:
            MalformedEncoding: If the reply is not a 32-byte public key
        """
        if self._hello is None:
            raise MalformedEncoding("finish() called before hello()")
        if len(reply) != 32:
            raise MalformedEncoding(f"Key agreement reply must be 32 bytes, got {len(reply)}")
        shared = self._private.exchange(X25519PublicKey.from_public_bytes(reply))
        return _derive(shared, self._hello, reply, self.purpose, self.endpoints, self.key_bytes)

    @staticmethod
    def respond(hello: bytes, rng: Optional[random.Random] = None) -> Tuple[bytes, SymmetricKey]:
        """Responder side.

        Args:
            hello (bytes): Initiator's hello
            rng (Optional[random.Random]): Source for the responder ephemeral

        Returns:
            Tuple[bytes, SymmetricKey]: Reply to send back and the derived key
        """
        purpose, first, second, width, peer_public = expect_fields(
            hello, [Tag.PURPOSE, Tag.PARTY, Tag.PARTY, Tag.INDEX, Tag.KEY]
        )
        if len(peer_public) != 32:
            raise MalformedEncoding("Key agreement hello carries a malformed public key")
        private_key = _ephemeral(rng)
        reply = _public_bytes(private_key)
        shared = private_key.exchange(X25519PublicKey.from_public_bytes(peer_public))
        key = _derive(shared, hello, reply, KeyPurpose(decode_text(purpose)),
                      (decode_text(first), decode_text(second)), decode_int(width))
        return reply, key

    @staticmethod
    def describe(hello: bytes) -> Tuple[KeyPurpose, Tuple[str, str]]:
        """Purpose and endpoint labels announced by a hello."""
        purpose, first, second, _, _ = expect_fields(hello, [Tag.PURPOSE, Tag.PARTY, Tag.PARTY, Tag.INDEX, Tag.KEY])
        return KeyPurpose(decode_text(purpose)), (decode_text(first), decode_text(second))


def negotiate_key(initiator: str, responder: str, purpose: KeyPurpose,
                  transport: Optional[Transport] = None,
                  endpoints: Optional[Tuple[str, str]] = None,
                  rng: Optional[random.Random] = None,
                  key_bytes: Optional[int] = None) -> SymmetricKey:
    """Run the exchange and return the initiator's copy of the key.

    Args:
        initiator (str): Party starting the exchange
        responder (str): Peer party
        purpose (KeyPurpose): Hop encryption or proof
        transport (Optional[Transport]): Delivers the hello to the responder and returns its reply;
            the responder keeps its own copy. Without a transport both halves run locally.
        endpoints (Optional[Tuple[str, str]]): Endpoint labels, (initiator, responder) by default
        rng (Optional[random.Random]): Source for the initiator ephemeral
        key_bytes (Optional[int]): Key width, configured width by default

    Returns:
        SymmetricKey: Fresh key shared with the responder

    Raises:
        PeerUnreachable: Raised by the transport when the responder cannot be reached
    """
    agreement = KeyAgreement(purpose, endpoints or (initiator, responder), key_bytes=key_bytes, rng=rng)
    hello = agreement.hello()
    if transport is None:
        reply, _ = KeyAgreement.respond(hello, rng=rng)
    else:
        reply = transport(hello)
    key = agreement.finish(reply)
    logger.debug(f"Negotiated {purpose.value} key {initiator}<->{responder}")
    return key
