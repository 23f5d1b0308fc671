"""Honest protocol party on the simulated network."""
import logging
import random
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Tuple

import simpy

from ..application.services.onion_service import OnionService
from ..domain.codec import Tag, decode_text, encode_fields, encode_text, expect_fields
from ..domain.exceptions import (
    AuthenticationFailure,
    BadPrevSignature,
    DomainException,
    MessageDropped,
    PeerUnreachable,
    StaleMessage,
)
from ..domain.models.crypto import Digest, KeyPair, KeyPurpose, Signature, SymmetricKey
from ..domain.models.disclosure import DisclosureRequest, Rebuttal
from ..domain.models.onion import Circuit, Evidence, Message, Onion
from ..domain.models.simnet import Envelope, ViewEntry
from ..infrastructure.crypto.key_agreement import KeyAgreement, negotiate_key
from ..infrastructure.crypto.primitives import sign_with, sym_decrypt, sym_encrypt

if TYPE_CHECKING:
    from .network import Network

logger = logging.getLogger(__name__)

EXTEND = b"\x01"
RELAY = b"\x00"


def _extend_cell(target: str, payload: bytes, flag: bytes) -> bytes:
    return encode_fields([
        (Tag.DIRECTIVE_TO, encode_text(target)),
        (Tag.PAYLOAD, payload),
        (Tag.FLAG, flag),
    ])


class Node:
    """Party following the transmitting and disclosure protocols exactly.

    A node keeps its own key archive: hop keys per session, proof keys per
    evidence handle, and the circuits it opened as a transmitter. Its view
    log records only the peers it talked to.

    Attributes:
        party_id (str): Registered identity
        keypair (KeyPair): Signing key pair
        online (bool): Offline nodes neither answer requests nor receive packets
        view (List[ViewEntry]): What this node observed
    """

    def __init__(self, party_id: str, keypair: KeyPair, network: "Network", rng: random.Random):
        self.party_id = party_id
        self.keypair = keypair
        self.network = network
        self.rng = rng
        self.online = True
        self.plea_delay_blocks = 0
        self.inbox = simpy.Store(network.env)
        self.view: List[ViewEntry] = []

        self.circuits: Dict[str, Circuit] = {}
        self.hop_keys: Dict[str, SymmetricKey] = {}
        self.proof_keys: Dict[Digest, SymmetricKey] = {}
        self.session_roots: Dict[Digest, str] = {}
        # evidence countersigned by a successor -> (successor, evidence it links)
        self.endorsed: Dict[Digest, Tuple[str, Optional[Digest]]] = {}
        self.evidence: Dict[str, Evidence] = {}
        self.delivered: Dict[str, Message] = {}
        self.sent: Dict[str, bytes] = {}
        self._negotiated: Dict[str, SymmetricKey] = {}
        self._awaiting_handle: Dict[str, SymmetricKey] = {}

        network.env.process(self.serve())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.party_id!r})"

    @property
    def onion(self) -> OnionService:
        return self.network.onion

    def observe(self, event: str, peer: Optional[str] = None) -> None:
        self.view.append(ViewEntry(time_ms=self.network.now(), event=event, peer=peer))

    def serve(self):
        """simpy process: handle inbox packets one at a time."""
        while True:
            envelope: Envelope = yield self.inbox.get()
            session = envelope.session_id
            if not self.online:
                self.network.record("drop", envelope.sender, self.party_id, session, "recipient offline")
                self.network.note_failure(session, MessageDropped(envelope.sender, self.party_id))
                continue
            try:
                self.receive(envelope)
            except StaleMessage as exc:
                self.network.record("discard", self.party_id, envelope.sender, session, str(exc))
                self.network.note_discard(session)
            except DomainException as exc:
                logger.error(f"'{self.party_id}' aborted session {session}: {exc}")
                self.network.record("abort", self.party_id, envelope.sender, session, str(exc))
                self.network.note_failure(session, exc)

    # ------------------------------------------------------------ transmitter

    def start_session(self, circuit: Circuit, message: Message) -> None:
        """Negotiate the hop keys, build the onion and hand it to the first relay."""
        circuit = self.open_circuit(circuit)
        onion = self.onion.build_onion(circuit, message, self.rng)
        self.send_packet(circuit.session_id, circuit.relays[0], onion.ciphertext,
                         OnionService.initial_content(onion))

    def open_circuit(self, circuit: Circuit) -> Circuit:
        """Negotiate one hop key per relay, extending the circuit through the relays already keyed.

        Returns:
            Circuit: The circuit with its hop keys, archived under the session id

        Raises:
            PeerUnreachable: A relay is offline
        """
        session = circuit.session_id
        keys: List[SymmetricKey] = []
        for position, relay in enumerate(circuit.relays):
            agreement = KeyAgreement(KeyPurpose.HOP, (circuit.path[position], relay), rng=self.rng)
            hello = agreement.hello()
            if position == 0:
                reply = self.network.request(self.party_id, relay, "negotiate",
                                             lambda node: node.accept_hop_key(session, hello), session)
            else:
                cell = sym_encrypt(keys[-1], _extend_cell(relay, hello, EXTEND), self.rng)
                for index in range(position - 2, -1, -1):
                    cell = sym_encrypt(keys[index], _extend_cell(circuit.relays[index + 1], cell, RELAY), self.rng)
                reply = self.network.request(self.party_id, circuit.relays[0], "extend",
                                             lambda node: node.relay_extend(session, cell), session)
                for key in keys:
                    reply = sym_decrypt(key, reply)
            keys.append(agreement.finish(reply))

        circuit = circuit.model_copy(update={"hop_keys": keys})
        self.circuits[session] = circuit
        logger.debug(f"'{self.party_id}' opened session {session} over {len(keys)} relays")
        return circuit

    def send_packet(self, session: str, recipient: str, packet: bytes, content: bytes,
                    terminal: bool = False, prev_handle: Optional[Digest] = None) -> Envelope:
        """Sign the evidence content of a packet and hand it to the network."""
        envelope = Envelope(
            sender=self.party_id,
            recipient=recipient,
            session_id=session,
            packet=packet,
            terminal=terminal,
            content_signature=sign_with(self.keypair, content).sig_bytes,
            prev_handle=prev_handle,
        )
        self.sent[session] = content
        self.observe("forward", recipient)
        self.network.record("forward", self.party_id, recipient, session, f"{len(packet)} bytes")
        self.network.send(envelope)
        return envelope

    # ------------------------------------------------------------ requests from peers

    def accept_hop_key(self, session: str, hello: bytes) -> bytes:
        reply, key = KeyAgreement.respond(hello, rng=self.rng)
        self.hop_keys[session] = key
        return reply

    def relay_extend(self, session: str, cell: bytes) -> bytes:
        """Unwrap one extend layer and pass it on; the reply goes back under this hop's key."""
        key = self._hop_key(session)
        target, payload, flag = expect_fields(sym_decrypt(key, cell), [Tag.DIRECTIVE_TO, Tag.PAYLOAD, Tag.FLAG])
        target = decode_text(target)
        if flag == EXTEND:
            reply = self.network.request(self.party_id, target, "negotiate",
                                         lambda node: node.accept_hop_key(session, payload), session)
        else:
            reply = self.network.request(self.party_id, target, "extend",
                                         lambda node: node.relay_extend(session, payload), session)
        return sym_encrypt(key, reply, self.rng)

    def accept_proof_key(self, session: str, hello: bytes) -> bytes:
        reply, key = KeyAgreement.respond(hello, rng=self.rng)
        self._awaiting_handle[session] = key
        return reply

    def accept_handle_notice(self, session: str, handle: Digest, successor: str) -> None:
        """Archive the proof key agreed with the successor under the evidence it committed."""
        key = self._awaiting_handle.pop(session, None)
        if key is None:
            return
        self.proof_keys[handle] = key
        own = self.evidence.get(session)
        self.endorsed[handle] = (successor, own.onchain_handle if own else None)
        if session in self.circuits:
            self.session_roots[handle] = session

    def endorse(self, session: str, content: bytes, requester: str) -> Signature:
        """Sign content again only if it is exactly what was sent in the session.

        Raises:
            BadPrevSignature: content differs from what this node sent
        """
        if self.sent.get(session) != content:
            logger.warning(f"'{self.party_id}' refused to endorse content for '{requester}'")
            raise BadPrevSignature(self.party_id, requester, "content differs from what was sent")
        return sign_with(self.keypair, content)

    # ------------------------------------------------------------ relay and receiver

    def negotiate_proof_key(self, peer: str, session: str) -> SymmetricKey:
        key = negotiate_key(
            self.party_id, peer, KeyPurpose.PROOF,
            transport=lambda hello: self.network.request(
                self.party_id, peer, "proof-key", lambda node: node.accept_proof_key(session, hello), session
            ),
            endpoints=(peer, self.party_id),
            rng=self.rng,
        )
        self._negotiated[session] = key
        return key

    def receive(self, envelope: Envelope) -> None:
        """Countersign the incoming hop, wait for its evidence to commit, then continue."""
        session = envelope.session_id
        sender = envelope.sender
        self.observe("receive", sender)
        signature = Signature(sig_bytes=envelope.content_signature)

        def negotiate() -> SymmetricKey:
            return self.negotiate_proof_key(sender, session)

        if envelope.prev_handle is None:
            evidence = self.countersign_initial(envelope, signature, negotiate)
        elif envelope.terminal:
            message = Message.from_canonical(envelope.packet)
            evidence = self.onion.make_evidence_final(
                sender, self.party_id, self.keypair, message,
                self.onion.committed_evidence(envelope.prev_handle), signature, negotiate,
                now=self.network.now(), rng=self.rng,
            )
        else:
            evidence = self.onion.make_evidence_hop(
                sender, self.party_id, self.keypair, envelope.packet,
                self.onion.committed_evidence(envelope.prev_handle), signature, negotiate, rng=self.rng,
            )
        self.archive_evidence(session, sender, evidence)

        if envelope.terminal:
            self.accept_delivery(session, sender, message)
        else:
            self.relay(session, envelope.packet, evidence)

    def countersign_initial(self, envelope: Envelope, signature: Signature,
                            negotiate: Callable[[], SymmetricKey]) -> Evidence:
        return self.onion.make_evidence_initial(
            envelope.sender, self.party_id, self.keypair, Onion(ciphertext=envelope.packet),
            signature, negotiate, rng=self.rng,
        )

    def archive_evidence(self, session: str, sender: str, evidence: Evidence) -> None:
        handle = evidence.onchain_handle
        self.proof_keys[handle] = self._negotiated.pop(session)
        self.evidence[session] = evidence
        self.network.note_evidence(session, handle)
        self.network.record("commit", self.party_id, sender, session, f"EV{evidence.index} {handle.short()}")
        try:
            self.network.request(self.party_id, sender, "handle-notice",
                                 lambda node: node.accept_handle_notice(session, handle, self.party_id), session)
        except PeerUnreachable:
            logger.warning(f"'{sender}' missed the handle notice for {handle.short()}")

    def relay(self, session: str, packet: bytes, evidence: Evidence) -> None:
        """Peel one layer and forward what it wraps to the directive's target."""
        layer = self.onion.peel_layer(self._hop_key(session), packet)
        if layer.is_terminal:
            outgoing, terminal = layer.inner.to_canonical(), True
        else:
            outgoing, terminal = layer.inner.ciphertext, False
        content = self.onion.hop_content(outgoing, evidence.onchain_handle, terminal)
        self.send_packet(session, layer.directive.target, outgoing, content, terminal, evidence.onchain_handle)

    def accept_delivery(self, session: str, sender: str, message: Message) -> None:
        self.delivered[session] = message
        self.network.note_delivery(session, message)
        self.network.record("deliver", self.party_id, sender, session, f"{len(message.payload)} bytes")

    def _hop_key(self, session: str) -> SymmetricKey:
        key = self.hop_keys.get(session)
        if key is None:
            raise AuthenticationFailure(f"No hop key for session {session}")
        return key

    # ------------------------------------------------------------ disclosure

    def accusation(self, session: str) -> Message:
        """Message this receiver accuses when it requests a disclosure."""
        return self.delivered[session]

    def vote(self, request: DisclosureRequest) -> bool:
        return True

    def release_proof_key(self, evidence_handle: Digest) -> Optional[SymmetricKey]:
        return self.proof_keys.get(evidence_handle)

    def rebut(self, pleader: str, prev_handle: Optional[Digest]) -> Optional[Rebuttal]:
        for handle, (successor, linked) in self.endorsed.items():
            if successor == pleader and linked == prev_handle:
                return Rebuttal(evidence_handle=handle, proof_key=self.proof_keys[handle])
        return None

    def confess(self, evidence_handle: Digest) -> Optional[List[SymmetricKey]]:
        session = self.session_roots.get(evidence_handle)
        if session is None:
            return None
        return list(self.circuits[session].hop_keys)
