"""Scripted adversaries, one per attack surface."""
import logging
from typing import Callable, Dict, Optional, Tuple

from ..application.services.onion_service import OnionService
from ..domain.exceptions import BadPrevSignature
from ..domain.models.crypto import KeyPurpose, Signature, SymmetricKey
from ..domain.models.ledger import TransactionKind
from ..domain.models.onion import Circuit, DoubleSignature, Evidence, EvidenceContent, Message, Onion
from ..domain.models.simnet import AdversaryScript, Envelope, MessengerVariant
from ..infrastructure.crypto.key_agreement import negotiate_key
from ..infrastructure.crypto.primitives import generate_symmetric_key, sign_with, sym_encrypt
from .node import Node

logger = logging.getLogger(__name__)

DECOY_PAYLOAD = b"benign: weather report"


def _decoy(message: Message) -> Message:
    return Message(payload=DECOY_PAYLOAD, timestamp=message.timestamp)


class Adversary(Node):
    """Node running a script instead of the protocol."""

    def __init__(self, *args, script: AdversaryScript, **kwargs):
        super().__init__(*args, **kwargs)
        self.script = script

    def fake_message(self, timestamp: Optional[int] = None) -> Message:
        return Message(payload=self.script.fake_payload,
                       timestamp=self.network.now() if timestamp is None else timestamp)


class MaliciousTransmitter(Adversary):
    """Signs a benign decoy while sending the false onion; the first relay refuses, so it then sends honestly."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.attempted = False

    def start_session(self, circuit: Circuit, message: Message) -> None:
        if self.attempted:
            super().start_session(circuit, message)
            return
        self.attempted = True
        circuit = self.open_circuit(circuit)
        onion = self.onion.build_onion(circuit, message, self.rng)
        decoy = self.onion.build_onion(circuit, _decoy(message), self.rng)
        self.network.record("decoy", self.party_id, circuit.relays[0], circuit.session_id)
        self.send_packet(circuit.session_id, circuit.relays[0], onion.ciphertext,
                         OnionService.initial_content(decoy))


class ColludingTransmitter(Adversary):
    """Hands its first relay a decoy onion to countersign in place of the one it sends."""

    def start_session(self, circuit: Circuit, message: Message) -> None:
        circuit = self.open_circuit(circuit)
        session = circuit.session_id
        first = circuit.relays[0]
        onion = self.onion.build_onion(circuit, message, self.rng)
        decoy = self.onion.build_onion(circuit, _decoy(message), self.rng)
        self.network.request(self.party_id, first, "collude",
                             lambda node: node.accept_decoy(session, decoy.ciphertext), session)
        self.send_packet(session, first, onion.ciphertext, OnionService.initial_content(decoy))


class ColludingRelay(Adversary):
    """First relay that binds EV_1 to the transmitter's decoy and forwards the real packet."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.decoys: Dict[str, bytes] = {}

    def accept_decoy(self, session: str, decoy: bytes) -> None:
        self.decoys[session] = decoy

    def countersign_initial(self, envelope: Envelope, signature: Signature,
                            negotiate: Callable[[], SymmetricKey]) -> Evidence:
        decoy = self.decoys.pop(envelope.session_id, None)
        if decoy is None:
            return super().countersign_initial(envelope, signature, negotiate)
        return self.onion.make_evidence_initial(
            envelope.sender, self.party_id, self.keypair, Onion(ciphertext=decoy),
            signature, negotiate, rng=self.rng,
        )


class MaliciousMessenger(Adversary):
    """Relay that drops the real packet and starts its own session carrying m_fake.

    ``forge`` commits a fabricated predecessor evidence in the previous relay's
    name; ``reuse`` links its genuine evidence to the substituted packet.

    Attributes:
        forged (Optional[Tuple[str, str]]): Substituted session id and the random receiver it went to
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.forged: Optional[Tuple[str, str]] = None

    def relay(self, session: str, packet: bytes, evidence: Evidence) -> None:
        if self.forged is not None:
            super().relay(session, packet, evidence)
            return

        successor = self.onion.peel_layer(self._hop_key(session), packet).directive.target
        candidates = sorted(set(self.network.members()) - {self.party_id, successor})
        receiver = self.rng.choice(candidates)
        fake_session = f"{self.rng.getrandbits(64):016x}"

        hop_key = negotiate_key(
            self.party_id, successor, KeyPurpose.HOP,
            transport=lambda hello: self.network.request(
                self.party_id, successor, "negotiate", lambda node: node.accept_hop_key(fake_session, hello),
                fake_session,
            ),
            rng=self.rng,
        )
        circuit = Circuit(session_id=fake_session, transmitter=self.party_id, receiver=receiver,
                          relays=[successor], hop_keys=[hop_key])
        self.circuits[fake_session] = circuit
        onion = self.onion.build_onion(circuit, self.fake_message(), self.rng)

        linked = evidence
        if self.script.variant == MessengerVariant.FORGE:
            linked = self._forge_evidence(evidence, onion.ciphertext)
        self.forged = (fake_session, receiver)
        self.network.record("substitute", self.party_id, successor, session, self.script.variant.value)
        content = self.onion.hop_content(onion.ciphertext, linked.onchain_handle)
        self.send_packet(fake_session, successor, onion.ciphertext, content, False, linked.onchain_handle)

    def _forge_evidence(self, genuine: Evidence, packet: bytes) -> Evidence:
        """Commit evidence that claims the predecessor signed packet; the inner signature is this node's own."""
        predecessor = OnionService.open_evidence(genuine, self.proof_keys[genuine.onchain_handle]).inner_signer
        previous = self.onion.committed_evidence(genuine.prev_handle)
        content = EvidenceContent(packet=packet, prev_evidence=previous.ciphertext).to_canonical()
        inner = sign_with(self.keypair, content)
        record = DoubleSignature(
            content=content,
            inner_signer=predecessor,
            inner_signature=inner,
            outer_signer=self.party_id,
            outer_signature=sign_with(self.keypair, inner.sig_bytes),
        )
        key = generate_symmetric_key(KeyPurpose.PROOF, (predecessor, self.party_id), self.rng)
        forged = Evidence(index=genuine.index, ciphertext=sym_encrypt(key, record.to_canonical(), self.rng),
                          prev_handle=genuine.prev_handle)
        tx = self.network.ledger.submit(TransactionKind.EVIDENCE, forged.payload_bytes(), self.party_id)
        self.network.wait_commit(tx.handle)
        self.proof_keys[tx.handle] = key
        logger.debug(f"'{self.party_id}' committed forged evidence {tx.handle.short()}")
        return forged.model_copy(update={"onchain_handle": tx.handle})


class ReplayRelay(Adversary):
    """Last relay that resends the delivered message once the freshness window has passed."""

    def send_packet(self, session, recipient, packet, content, terminal=False, prev_handle=None) -> Envelope:
        envelope = super().send_packet(session, recipient, packet, content, terminal, prev_handle)
        if terminal:
            self.network.env.process(self._replay(envelope))
        return envelope

    def _replay(self, envelope: Envelope):
        yield self.network.env.timeout(self.network.settings.onion.freshness_window_ms + 1)
        self.network.mark_replay()
        self.network.record("replay", self.party_id, envelope.recipient, envelope.session_id)
        self.network.send(envelope)


class CalumniatingReceiver(Adversary):
    """Receiver that asks the last relay to endorse m_fake, then accuses with it."""

    def receive(self, envelope: Envelope) -> None:
        session = envelope.session_id
        if envelope.terminal and session not in self.delivered:
            fake = self.fake_message(Message.from_canonical(envelope.packet).timestamp)
            content = self.onion.hop_content(fake.to_canonical(), envelope.prev_handle, terminal=True)
            try:
                self.network.request(self.party_id, envelope.sender, "endorse",
                                     lambda node: node.endorse(session, content, self.party_id), session)
                self.network.record("endorse-accepted", self.party_id, envelope.sender, session)
            except BadPrevSignature:
                self.network.record("endorse-refused", self.party_id, envelope.sender, session)
        super().receive(envelope)

    def accusation(self, session: str) -> Message:
        return self.fake_message(self.delivered[session].timestamp)
