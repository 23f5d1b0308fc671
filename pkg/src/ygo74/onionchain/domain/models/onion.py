"""Message transmitting domain models."""
from typing import List, Optional, Union
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..codec import (
    Tag,
    decode_fields,
    decode_int,
    decode_text,
    encode_fields,
    encode_int,
    encode_text,
    expect_fields,
)
from ..exceptions.crypto_exceptions import MalformedEncoding
from .crypto import Digest, Signature, SymmetricKey


class Message(BaseModel):
    """Payload with its freshness timestamp (milliseconds)."""
    model_config = ConfigDict(frozen=True)

    payload: bytes
    timestamp: int = Field(ge=0)

    def to_canonical(self) -> bytes:
        return encode_fields([
            (Tag.TIMESTAMP, encode_int(self.timestamp)),
            (Tag.MESSAGE_PAYLOAD, self.payload),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "Message":
        timestamp, payload = expect_fields(data, [Tag.TIMESTAMP, Tag.MESSAGE_PAYLOAD])
        return cls(payload=payload, timestamp=decode_int(timestamp))


class RoutingDirective(BaseModel):
    """a→b routing message embedded in a layer."""
    model_config = ConfigDict(frozen=True)

    source: str
    target: str

    @model_validator(mode="after")
    def validate_distinct(self):
        if self.source == self.target:
            raise ValueError("Routing directive source and target must differ")
        return self

    def __str__(self) -> str:
        return f"{self.source}->{self.target}"


class Onion(BaseModel):
    """Layered ciphertext; a peeled packet V_i is an Onion with i+1 layers removed."""
    model_config = ConfigDict(frozen=True)

    ciphertext: bytes


class PeeledLayer(BaseModel):
    """Result of removing one layer: the directive and what it wraps."""
    model_config = ConfigDict(frozen=True)

    directive: RoutingDirective
    inner: Union[Onion, Message]

    @property
    def is_terminal(self) -> bool:
        return isinstance(self.inner, Message)

    def to_canonical(self) -> bytes:
        if isinstance(self.inner, Message):
            inner_field = (Tag.INNER_MESSAGE, self.inner.to_canonical())
        else:
            inner_field = (Tag.INNER_LAYER, self.inner.ciphertext)
        return encode_fields([
            (Tag.DIRECTIVE_FROM, encode_text(self.directive.source)),
            (Tag.DIRECTIVE_TO, encode_text(self.directive.target)),
            inner_field,
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "PeeledLayer":
        fields = decode_fields(data)
        if len(fields) != 3 or fields[0][0] != Tag.DIRECTIVE_FROM or fields[1][0] != Tag.DIRECTIVE_TO:
            raise MalformedEncoding("Onion layer does not start with a routing directive")
        try:
            directive = RoutingDirective(source=decode_text(fields[0][1]), target=decode_text(fields[1][1]))
        except ValidationError as exc:
            raise MalformedEncoding("Routing directive source and target must differ") from exc
        tag, inner = fields[2]
        if tag == Tag.INNER_MESSAGE:
            return cls(directive=directive, inner=Message.from_canonical(inner))
        if tag == Tag.INNER_LAYER:
            return cls(directive=directive, inner=Onion(ciphertext=inner))
        raise MalformedEncoding(f"Unknown inner layer tag 0x{tag:02x}")


class Circuit(BaseModel):
    """Transmitter-side circuit description.

    Attributes:
        session_id (str): Random per-message session token
        transmitter (str): Sending party
        receiver (str): Receiving party
        relays (List[str]): Ordered relays
        hop_keys (List[SymmetricKey]): K_{T-A}, K_{A-B}, ... one per relay
    """
    model_config = ConfigDict(frozen=True)

    session_id: str
    transmitter: str
    receiver: str
    relays: List[str]
    hop_keys: List[SymmetricKey] = Field(default_factory=list, repr=False)

    @model_validator(mode="after")
    def validate_relays(self):
        if len(set(self.relays)) != len(self.relays):
            raise ValueError("Relays must be pairwise distinct")
        if self.transmitter in self.relays or self.receiver in self.relays:
            raise ValueError("Relays must exclude transmitter and receiver")
        if self.hop_keys and len(self.hop_keys) != len(self.relays):
            raise ValueError("One hop key per relay is required")
        return self

    @property
    def path(self) -> List[str]:
        """Parties in hop order: transmitter, relays, receiver."""
        return [self.transmitter, *self.relays, self.receiver]

    def directives(self) -> List[RoutingDirective]:
        """relay_i -> relay_{i+1}, ending with relay_n -> receiver."""
        hops = [*self.relays, self.receiver]
        return [RoutingDirective(source=hops[i], target=hops[i + 1]) for i in range(len(self.relays))]


class DoubleSignature(BaseModel):
    """Plaintext of an evidence record.

    The inner signature covers ``content``; the outer signature covers the
    inner signature bytes.
    """
    model_config = ConfigDict(frozen=True)

    content: bytes
    inner_signer: str
    inner_signature: Signature
    outer_signer: str
    outer_signature: Signature

    def to_canonical(self) -> bytes:
        return encode_fields([
            (Tag.CONTENT, self.content),
            (Tag.INNER_SIGNER, encode_text(self.inner_signer)),
            (Tag.INNER_SIGNATURE, self.inner_signature.sig_bytes),
            (Tag.OUTER_SIGNER, encode_text(self.outer_signer)),
            (Tag.OUTER_SIGNATURE, self.outer_signature.sig_bytes),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "DoubleSignature":
        content, inner_signer, inner_sig, outer_signer, outer_sig = expect_fields(
            data,
            [Tag.CONTENT, Tag.INNER_SIGNER, Tag.INNER_SIGNATURE, Tag.OUTER_SIGNER, Tag.OUTER_SIGNATURE],
        )
        return cls(
            content=content,
            inner_signer=decode_text(inner_signer),
            inner_signature=Signature(sig_bytes=inner_sig),
            outer_signer=decode_text(outer_signer),
            outer_signature=Signature(sig_bytes=outer_sig),
        )


class EvidenceContent(BaseModel):
    """Signed content of EV_2 .. EV_{n+1}: the relayed packet or message plus the previous evidence."""
    model_config = ConfigDict(frozen=True)

    packet: bytes
    prev_evidence: bytes
    terminal: bool = False

    def to_canonical(self) -> bytes:
        packet_tag = Tag.INNER_MESSAGE if self.terminal else Tag.PACKET
        return encode_fields([(packet_tag, self.packet), (Tag.PREV_EVIDENCE, self.prev_evidence)])

    @classmethod
    def from_canonical(cls, data: bytes) -> "EvidenceContent":
        fields = decode_fields(data)
        if len(fields) != 2 or fields[1][0] != Tag.PREV_EVIDENCE:
            raise MalformedEncoding("Evidence content must hold a packet and the previous evidence")
        tag, packet = fields[0]
        if tag not in (Tag.PACKET, Tag.INNER_MESSAGE):
            raise MalformedEncoding(f"Unknown evidence packet tag 0x{tag:02x}")
        return cls(packet=packet, prev_evidence=fields[1][1], terminal=tag == Tag.INNER_MESSAGE)


class Evidence(BaseModel):
    """On-chain evidence EV_i.

    Attributes:
        index (int): Hop index, 1 .. n+1
        ciphertext (bytes): Proof-key encryption of a DoubleSignature
        onchain_handle (Optional[Digest]): Handle once submitted
        prev_handle (Optional[Digest]): Handle of EV_{i-1}, absent for EV_1
    """
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    ciphertext: bytes
    onchain_handle: Optional[Digest] = None
    prev_handle: Optional[Digest] = None

    def payload_bytes(self) -> bytes:
        prev = self.prev_handle.hash_bytes if self.prev_handle else b""
        return encode_fields([
            (Tag.INDEX, encode_int(self.index, 4)),
            (Tag.CIPHERTEXT, self.ciphertext),
            (Tag.PREV_HANDLE, prev),
        ])

    @classmethod
    def from_payload(cls, data: bytes, handle: Optional[Digest] = None) -> "Evidence":
        index, ciphertext, prev = expect_fields(data, [Tag.INDEX, Tag.CIPHERTEXT, Tag.PREV_HANDLE])
        return cls(
            index=decode_int(index),
            ciphertext=ciphertext,
            onchain_handle=handle,
            prev_handle=Digest(hash_bytes=prev) if prev else None,
        )


class TransmitReceipt(BaseModel):
    """Issued to the transmitter after a fully successful transmission."""
    model_config = ConfigDict(frozen=True)

    session_id: str
    transmitter: str
    receiver: str
    relays: List[str]
    evidence_handles: List[Digest]
    delivered_digest: Digest

    @model_validator(mode="after")
    def validate_counts(self):
        if len(self.evidence_handles) != len(self.relays) + 1:
            raise ValueError("A receipt carries exactly n + 1 evidence handles")
        return self


class SessionReport(BaseModel):
    """What the network observed for one transmission session."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    session_id: str
    evidence_handles: List[Digest] = Field(default_factory=list)
    delivered: Optional[Message] = None
    discarded: bool = False
    failure: Optional[Exception] = None
