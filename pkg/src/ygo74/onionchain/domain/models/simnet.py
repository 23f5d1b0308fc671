"""Simulated network domain models."""
import json
from enum import Enum
from typing import FrozenSet, Iterator, List, Optional, Set
from pydantic import BaseModel, ConfigDict, Field

from .crypto import Digest
from .disclosure import Culprit, DisclosureOutcome
from .onion import TransmitReceipt


class AdversaryKind(str, Enum):
    """Scripted behaviours, one per attack surface."""

    HONEST = "honest"
    MALICIOUS_TRANSMITTER = "malicious-transmitter"
    MALICIOUS_MESSENGER = "malicious-messenger"
    REPLAY = "replay"
    CALUMNIATING = "calumniating"
    COLLUSION = "collusion"


class MessengerVariant(str, Enum):
    """How a malicious relay substitutes the relayed packet."""

    FORGE = "forge"
    REUSE = "reuse"


class AdversaryScript(BaseModel):
    """Attack to run in a scenario.

    Attributes:
        kind (AdversaryKind): Which attack
        fake_payload (bytes): Payload of m_fake
        variant (MessengerVariant): Malicious-messenger flavour
        colluders (FrozenSet[str]): Filled in by the scenario runner for collusion
    """
    model_config = ConfigDict(frozen=True)

    kind: AdversaryKind = AdversaryKind.HONEST
    fake_payload: bytes = b"m_fake: forged announcement"
    variant: MessengerVariant = MessengerVariant.FORGE
    colluders: FrozenSet[str] = frozenset()

    @classmethod
    def honest(cls) -> "AdversaryScript":
        return cls()


class FaultKind(str, Enum):
    """Injectable faults."""

    NODE_OFFLINE = "node_offline"
    DROP_MESSAGE = "drop_message"
    DELAY = "delay"
    # blocks a party lets pass before answering a disclosure demand
    PLEA_DELAY = "plea_delay"


class Envelope(BaseModel):
    """Packet travelling between two adjacent parties.

    Attributes:
        sender (str): Party handing the packet over
        recipient (str): Next hop
        session_id (str): Per-message session token
        packet (bytes): Onion ciphertext, or canonical message at the last hop
        terminal (bool): Packet is the plain message for the receiver
        content_signature (bytes): Sender's signature over the evidence content
        prev_handle (Optional[Digest]): Sender's own evidence, absent on the first hop
    """
    model_config = ConfigDict(frozen=True)

    sender: str
    recipient: str
    session_id: str
    packet: bytes
    terminal: bool = False
    content_signature: bytes
    prev_handle: Optional[Digest] = None


class TraceEvent(BaseModel):
    """Global simulator event with a logical timestamp."""
    model_config = ConfigDict(frozen=True)

    seq: int
    time_ms: int
    kind: str
    actor: str
    peer: Optional[str] = None
    session_id: Optional[str] = None
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True)


class ViewEntry(BaseModel):
    """What a single node observed: an event and the peer it came from or went to."""
    model_config = ConfigDict(frozen=True)

    time_ms: int
    event: str
    peer: Optional[str] = None


class Trace(BaseModel):
    """Ordered global event list."""

    events: List[TraceEvent] = Field(default_factory=list)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of_kind(self, kind: str, session_id: Optional[str] = None) -> List[TraceEvent]:
        return [e for e in self.events if e.kind == kind and (session_id is None or e.session_id == session_id)]

    def to_json_lines(self) -> str:
        return "".join(f"{event.to_json()}\n" for event in self.events)


class ScenarioOutcome(BaseModel):
    """Result of one scripted run.

    Attributes:
        kind (AdversaryKind): Script that ran
        delivered (bool): The receiver accepted a message
        discarded (bool): The receiver discarded a stale message
        receipt (Optional[TransmitReceipt]): Receipt of the last successful transmission
        evidence_count (int): Evidence transactions committed during the run
        evidence_before_replay (Optional[int]): Evidence count when the replay was sent
        disclosure (Optional[DisclosureOutcome]): Disclosure transcript when one ran
        culprit (Optional[Culprit]): Final accountable party
        expected_culprits (Set[str]): Parties the script holds responsible
        honest_relays (Set[str]): Relays that followed the protocol
        errors (List[str]): Aborted sessions, as text
    """

    kind: AdversaryKind
    delivered: bool = False
    discarded: bool = False
    receipt: Optional[TransmitReceipt] = None
    evidence_count: int = 0
    evidence_before_replay: Optional[int] = None
    disclosure: Optional[DisclosureOutcome] = None
    culprit: Optional[Culprit] = None
    expected_culprits: Set[str] = Field(default_factory=set)
    honest_relays: Set[str] = Field(default_factory=set)
    errors: List[str] = Field(default_factory=list)

    @property
    def defeated(self) -> bool:
        """Attack resolved: correct discard, or a culprit inside the expected set and no honest relay blamed."""
        if self.kind == AdversaryKind.REPLAY:
            return self.discarded and self.evidence_before_replay == self.evidence_count
        if self.culprit is None:
            return False
        if self.culprit.party_id in self.honest_relays:
            return False
        return self.culprit.party_id in self.expected_culprits
