"""Identity disclosure domain models."""
from enum import Enum
from typing import List, Optional
from pydantic import BaseModel, ConfigDict, Field

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
from .crypto import Digest, KeyPurpose, Signature, SymmetricKey


def encode_key(key: Optional[SymmetricKey]) -> bytes:
    """Canonical form of a released key; empty bytes for "no key"."""
    if key is None:
        return b""
    return encode_fields([
        (Tag.KEY, key.key_bytes),
        (Tag.PURPOSE, encode_text(key.purpose.value)),
        (Tag.PARTY, encode_text(key.endpoints[0])),
        (Tag.PARTY, encode_text(key.endpoints[1])),
    ])


def decode_key(data: bytes) -> Optional[SymmetricKey]:
    if not data:
        return None
    key_bytes, purpose, first, second = expect_fields(data, [Tag.KEY, Tag.PURPOSE, Tag.PARTY, Tag.PARTY])
    return SymmetricKey(
        key_bytes=key_bytes,
        purpose=KeyPurpose(decode_text(purpose)),
        endpoints=(decode_text(first), decode_text(second)),
    )


class DisclosureRequest(BaseModel):
    """Receiver's accusation, released with the terminal proof key.

    Attributes:
        requester (str): Accusing receiver
        accused_message_digest (Digest): Digest of canonical(m_fake)
        terminal_evidence_handle (Digest): Location of EV_{n+1}
        released_proof_key (SymmetricKey): PK between last relay and receiver
    """
    model_config = ConfigDict(frozen=True)

    requester: str
    accused_message_digest: Digest
    terminal_evidence_handle: Digest
    released_proof_key: SymmetricKey

    def to_canonical(self) -> bytes:
        return encode_fields([
            (Tag.PARTY, encode_text(self.requester)),
            (Tag.CONTENT, self.accused_message_digest.hash_bytes),
            (Tag.HANDLE, self.terminal_evidence_handle.hash_bytes),
            (Tag.KEY, encode_key(self.released_proof_key)),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "DisclosureRequest":
        requester, accused, handle, key = expect_fields(data, [Tag.PARTY, Tag.CONTENT, Tag.HANDLE, Tag.KEY])
        return cls(
            requester=decode_text(requester),
            accused_message_digest=Digest(hash_bytes=accused),
            terminal_evidence_handle=Digest(hash_bytes=handle),
            released_proof_key=decode_key(key),
        )


class Vote(BaseModel):
    """Signed approval or rejection of a disclosure request."""
    model_config = ConfigDict(frozen=True)

    voter: str
    request_handle: Digest
    approve: bool
    signature: Signature

    @staticmethod
    def signed_bytes(request_handle: Digest, approve: bool) -> bytes:
        return encode_fields([
            (Tag.HANDLE, request_handle.hash_bytes),
            (Tag.FLAG, b"\x01" if approve else b"\x00"),
        ])

    def to_canonical(self) -> bytes:
        return encode_fields([
            (Tag.PARTY, encode_text(self.voter)),
            (Tag.HANDLE, self.request_handle.hash_bytes),
            (Tag.FLAG, b"\x01" if self.approve else b"\x00"),
            (Tag.SIGNATURE, self.signature.sig_bytes),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "Vote":
        voter, handle, flag, signature = expect_fields(data, [Tag.PARTY, Tag.HANDLE, Tag.FLAG, Tag.SIGNATURE])
        return cls(
            voter=decode_text(voter),
            request_handle=Digest(hash_bytes=handle),
            approve=flag == b"\x01",
            signature=Signature(sig_bytes=signature),
        )


class PleaVerdict(str, Enum):
    """Outcome of a single plea of innocence."""

    INNOCENT = "Innocent"
    CULPRIT_NO_KEY = "CulpritNoKey"
    CULPRIT_BAD_SIGNATURE = "CulpritBadSignature"


class CulpritReason(str, Enum):
    """Why a party is held accountable."""

    TRANSMITTER_ORIGIN = "TransmitterOrigin"
    REFUSED_PLEA = "RefusedPlea"
    FORGED_EVIDENCE = "ForgedEvidence"
    CALUMNIATING_RECEIVER = "CalumniatingReceiver"


class Culprit(BaseModel):
    """Party returned by the disclosure walk."""
    model_config = ConfigDict(frozen=True)

    party_id: str
    reason: CulpritReason


class Rebuttal(BaseModel):
    """Predecessor's counter-plea: its own evidence with the pleader."""
    model_config = ConfigDict(frozen=True)

    evidence_handle: Digest
    proof_key: SymmetricKey


class PleaResult(BaseModel):
    """Publicly recomputable result of one plea.

    Attributes:
        pleading_node (str): Node that was asked to release its proof key
        evidence_handle (Digest): Evidence being opened
        revealed_key (Optional[SymmetricKey]): Released proof key, None on refusal
        double_signature (Optional[bytes]): Decrypted canonical double signature
        previous_node (Optional[str]): Inner signer named by the evidence
        prev_evidence_handle (Optional[Digest]): Back-pointer to EV_{i-1}
        revealed_packet (Optional[bytes]): V (or canonical m) carried by the content
        verdict (PleaVerdict): Innocent or a culprit branch
        culprit (Optional[str]): Accountable party for culprit verdicts
        matches_expected (Optional[bool]): Whether the revealed packet equals the caller's expectation
        rebuttal (Optional[Rebuttal]): Predecessor's counter-plea that moved the blame to the pleader
    """
    model_config = ConfigDict(frozen=True)

    pleading_node: str
    evidence_handle: Digest
    revealed_key: Optional[SymmetricKey] = None
    double_signature: Optional[bytes] = None
    previous_node: Optional[str] = None
    prev_evidence_handle: Optional[Digest] = None
    revealed_packet: Optional[bytes] = None
    verdict: PleaVerdict
    culprit: Optional[str] = None
    matches_expected: Optional[bool] = None
    rebuttal: Optional[Rebuttal] = None

    @property
    def rebutted(self) -> bool:
        return self.rebuttal is not None

    def to_canonical(self, request_handle: Digest, step: int) -> bytes:
        """Plea transaction payload."""
        return encode_fields([
            (Tag.HANDLE, request_handle.hash_bytes),
            (Tag.INDEX, encode_int(step, 4)),
            (Tag.PARTY, encode_text(self.pleading_node)),
            (Tag.PREV_HANDLE, self.evidence_handle.hash_bytes),
            (Tag.KEY, encode_key(self.revealed_key)),
            (Tag.VERDICT, encode_text(self.verdict.value)),
            (Tag.SUBMITTER, encode_text(self.culprit or "")),
            (Tag.REBUTTAL_HANDLE, self.rebuttal.evidence_handle.hash_bytes if self.rebuttal else b""),
            (Tag.REBUTTAL_KEY, encode_key(self.rebuttal.proof_key) if self.rebuttal else b""),
        ])


class PleaRecord(BaseModel):
    """Decoded Plea transaction, enough to re-run the plea."""
    model_config = ConfigDict(frozen=True)

    request_handle: Digest
    step: int
    pleading_node: str
    evidence_handle: Digest
    revealed_key: Optional[SymmetricKey]
    verdict: PleaVerdict
    culprit: Optional[str]
    rebuttal: Optional[Rebuttal] = None

    @classmethod
    def from_canonical(cls, data: bytes) -> "PleaRecord":
        request, step, node, evidence, key, verdict, culprit, rebuttal_handle, rebuttal_key = expect_fields(
            data,
            [Tag.HANDLE, Tag.INDEX, Tag.PARTY, Tag.PREV_HANDLE, Tag.KEY, Tag.VERDICT, Tag.SUBMITTER,
             Tag.REBUTTAL_HANDLE, Tag.REBUTTAL_KEY],
        )
        rebuttal = None
        if rebuttal_handle:
            rebuttal = Rebuttal(evidence_handle=Digest(hash_bytes=rebuttal_handle), proof_key=decode_key(rebuttal_key))
        return cls(
            request_handle=Digest(hash_bytes=request),
            step=decode_int(step),
            pleading_node=decode_text(node),
            evidence_handle=Digest(hash_bytes=evidence),
            revealed_key=decode_key(key),
            verdict=PleaVerdict(decode_text(verdict)),
            culprit=decode_text(culprit) or None,
            rebuttal=rebuttal,
        )


class ConfessionResult(BaseModel):
    """Transmitter's confession outcome."""
    model_config = ConfigDict(frozen=True)

    recovered_message: Optional[bytes] = None
    keys_opened_onion: bool
    divergence_index: Optional[int] = None
    culprit: Culprit


class ConfessionRecord(BaseModel):
    """Decoded Confession transaction: the released hop keys and the verdict they led to.

    Attributes:
        request_handle (Digest): Disclosure request the confession answers
        transmitter (str): Party the plea walk ended at
        hop_keys (Optional[List[SymmetricKey]]): Released hop keys, None when the transmitter stayed silent
        culprit (Culprit): Culprit after the confession
        divergence_index (Optional[int]): First onion layer differing from the forwarded packets
    """
    model_config = ConfigDict(frozen=True)

    request_handle: Digest
    transmitter: str
    hop_keys: Optional[List[SymmetricKey]] = None
    culprit: Culprit
    divergence_index: Optional[int] = None

    def to_canonical(self) -> bytes:
        keys = b""
        if self.hop_keys is not None:
            keys = encode_fields([(Tag.KEY, encode_key(key)) for key in self.hop_keys])
        return encode_fields([
            (Tag.HANDLE, self.request_handle.hash_bytes),
            (Tag.PARTY, encode_text(self.transmitter)),
            (Tag.FLAG, b"\x00" if self.hop_keys is None else b"\x01"),
            (Tag.KEY, keys),
            (Tag.SUBMITTER, encode_text(self.culprit.party_id)),
            (Tag.VERDICT, encode_text(self.culprit.reason.value)),
            (Tag.INDEX, b"" if self.divergence_index is None else encode_int(self.divergence_index, 4)),
        ])

    @classmethod
    def from_canonical(cls, data: bytes) -> "ConfessionRecord":
        request, transmitter, flag, keys, culprit, reason, index = expect_fields(
            data, [Tag.HANDLE, Tag.PARTY, Tag.FLAG, Tag.KEY, Tag.SUBMITTER, Tag.VERDICT, Tag.INDEX],
        )
        hop_keys: Optional[List[SymmetricKey]] = None
        if flag == b"\x01":
            hop_keys = []
            for tag, payload in decode_fields(keys):
                key = decode_key(payload) if tag == Tag.KEY else None
                if key is None:
                    raise MalformedEncoding("Confession holds a field that is not a hop key")
                hop_keys.append(key)
        return cls(
            request_handle=Digest(hash_bytes=request),
            transmitter=decode_text(transmitter),
            hop_keys=hop_keys,
            culprit=Culprit(party_id=decode_text(culprit), reason=CulpritReason(decode_text(reason))),
            divergence_index=decode_int(index) if index else None,
        )


class DisclosureOutcome(BaseModel):
    """Full result of an identity disclosure."""

    request_handle: Digest
    culprit: Culprit
    pleas: List[PleaResult] = Field(default_factory=list)
    recovered_onion: Optional[bytes] = None
    plea_handles: List[Digest] = Field(default_factory=list)
    confession: Optional[ConfessionResult] = None
    confession_handle: Optional[Digest] = None

    @property
    def final_culprit(self) -> Culprit:
        return self.confession.culprit if self.confession else self.culprit


class TallyResult(BaseModel):
    """Vote count for one disclosure request."""
    model_config = ConfigDict(frozen=True)

    request_handle: Digest
    approvals: int
    rejections: int
    members: int

    @property
    def approved(self) -> bool:
        return self.approvals > self.members // 2
