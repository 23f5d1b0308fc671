"""Message transmitting protocol: circuits, onions and the per-hop evidence chain."""
import logging
import random
import time
from typing import Callable, List, Optional, Sequence, Union

from ...config.settings import OnionSettings, settings
from ...domain.exceptions.crypto_exceptions import MalformedEncoding
from ...domain.exceptions.ledger_exceptions import TransactionNotFound
from ...domain.exceptions.onion_exceptions import (
    BadPrevSignature,
    BadTransmitterSignature,
    InsufficientNodes,
    MessageDropped,
    NTooSmall,
    PrevEvidenceNotCommitted,
    StaleMessage,
    TransmitAborted,
)
from ...domain.models.crypto import Digest, KeyPair, Signature, SymmetricKey
from ...domain.models.ledger import TransactionKind
from ...domain.models.onion import (
    Circuit,
    DoubleSignature,
    Evidence,
    EvidenceContent,
    Message,
    Onion,
    PeeledLayer,
    TransmitReceipt,
)
from ...domain.protocols.party_network import PartyNetwork
from ...infrastructure.crypto.primitives import digest, sign_with, sym_decrypt, sym_encrypt, verify
from ...infrastructure.ledger.ledger import Ledger
from ...infrastructure.observability.metrics_service import get_metrics_service
from ...infrastructure.retry.commit_waiter import CommitWaiter

logger = logging.getLogger(__name__)

# A proof key, or a callable negotiating one once the incoming signature checked out
KeySource = Union[SymmetricKey, Callable[[], SymmetricKey]]


def _resolve_key(source: KeySource) -> SymmetricKey:
    return source if isinstance(source, SymmetricKey) else source()


class OnionService:
    """Service running the message transmitting protocol against a ledger."""

    def __init__(self, ledger: Ledger,
                 onion_settings: Optional[OnionSettings] = None,
                 commit_waiter: Optional[CommitWaiter] = None):
        """Initialize service.

        Args:
            ledger (Ledger): Ledger evidence is written to
            onion_settings (Optional[OnionSettings]): Relay minimum and freshness window
            commit_waiter (Optional[CommitWaiter]): When given, evidence submission waits for the commit
        """
        self._ledger = ledger
        self._settings = onion_settings or settings.onion
        self._commit_waiter = commit_waiter
        logger.debug("OnionService initialized")

    # ------------------------------------------------------------ circuits

    def select_relays(self, members: Sequence[str], n: int, rng: random.Random,
                      transmitter: str, receiver: str) -> Circuit:
        """Pick n distinct relays uniformly among the other members.

        Args:
            members (Sequence[str]): Registered party ids
            n (int): Relay count
            rng (random.Random): Source of the choice and of the session id
            transmitter (str): Sending party, never a relay
            receiver (str): Receiving party, never a relay

        Returns:
            Circuit: Circuit skeleton without hop keys

        Raises:
            NTooSmall: n below the configured minimum
            InsufficientNodes: Fewer than n eligible members
        """
        if n < self._settings.min_relays:
            raise NTooSmall(n, self._settings.min_relays)
        eligible = sorted(set(members) - {transmitter, receiver})
        if len(eligible) < n:
            logger.error(f"Only {len(eligible)} eligible relays for a {n}-relay circuit")
            raise InsufficientNodes(len(eligible), n)

        relays = rng.sample(eligible, n)
        session_id = f"{rng.getrandbits(64):016x}"
        logger.debug(f"Session {session_id}: selected {n} relays")
        return Circuit(session_id=session_id, transmitter=transmitter, receiver=receiver, relays=relays)

    @staticmethod
    def build_onion(circuit: Circuit, message: Message, rng: Optional[random.Random] = None) -> Onion:
        """Wrap the message in one layer per relay, innermost first.

        Layer i is encrypted under hop key i and carries the directive
        relay_i -> relay_{i+1} (relay_n -> receiver for the last one).
        """
        if not circuit.hop_keys:
            raise ValueError("Circuit hop keys must be negotiated before building the onion")
        inner: Union[Onion, Message] = message
        for key, directive in reversed(list(zip(circuit.hop_keys, circuit.directives()))):
            layer = PeeledLayer(directive=directive, inner=inner)
            inner = Onion(ciphertext=sym_encrypt(key, layer.to_canonical(), rng))
        return inner

    @staticmethod
    def peel_layer(hop_key: SymmetricKey, onion: Union[Onion, bytes]) -> PeeledLayer:
        """Remove one layer.

        Raises:
            AuthenticationFailure: Wrong key, skipped layer or tampered ciphertext
        """
        ciphertext = onion.ciphertext if isinstance(onion, Onion) else onion
        return PeeledLayer.from_canonical(sym_decrypt(hop_key, ciphertext))

    # ------------------------------------------------------------ evidence

    def evidence_at(self, handle: Digest) -> Evidence:
        """Committed evidence by handle.

        Raises:
            TransactionNotFound: Handle unknown or not an Evidence transaction
        """
        tx = self._ledger.get_transaction(handle)
        if tx.kind != TransactionKind.EVIDENCE:
            raise TransactionNotFound(handle.hex())
        return Evidence.from_payload(tx.payload, handle)

    def committed_evidence(self, handle: Digest) -> Evidence:
        if not self._ledger.is_committed(handle):
            raise PrevEvidenceNotCommitted(handle.hex())
        try:
            return self.evidence_at(handle)
        except (TransactionNotFound, MalformedEncoding) as exc:
            raise PrevEvidenceNotCommitted(handle.hex()) from exc

    @staticmethod
    def initial_content(ev0: Union[Onion, bytes]) -> bytes:
        """Content of EV_1: the onion itself."""
        return ev0.ciphertext if isinstance(ev0, Onion) else ev0

    def hop_content(self, packet: bytes, prev_handle: Digest, terminal: bool = False) -> bytes:
        """Content of EV_2 .. EV_{n+1}: the relayed packet (or canonical m) and the previous evidence.

        Raises:
            PrevEvidenceNotCommitted: prev_handle is not a committed evidence
        """
        previous = self.committed_evidence(prev_handle)
        return EvidenceContent(packet=packet, prev_evidence=previous.ciphertext, terminal=terminal).to_canonical()

    def signed_by(self, party_id: str, signature: Signature, content: bytes) -> bool:
        """Check a signature against the party's committed key."""
        record = self._ledger.registration_of(party_id)
        return record is not None and verify(record.public_key, signature, content)

    @staticmethod
    def open_evidence(evidence: Union[Evidence, bytes], proof_key: SymmetricKey) -> DoubleSignature:
        """Decrypt an evidence record.

        Raises:
            AuthenticationFailure: proof_key does not open it
        """
        ciphertext = evidence.ciphertext if isinstance(evidence, Evidence) else evidence
        return DoubleSignature.from_canonical(sym_decrypt(proof_key, ciphertext))

    def make_evidence_initial(self, transmitter: str, first_relay: str, relay_keypair: KeyPair,
                              ev0: Onion, transmitter_signature: Signature, proof_key: KeySource,
                              rng: Optional[random.Random] = None) -> Evidence:
        """First relay countersigns the transmitter's signature over EV_0.

        Raises:
            BadTransmitterSignature: Signature does not verify under the transmitter's key
        """
        content = self.initial_content(ev0)
        if not self.signed_by(transmitter, transmitter_signature, content):
            logger.warning(f"'{first_relay}' refused to countersign EV0 from '{transmitter}'")
            raise BadTransmitterSignature(transmitter, first_relay)
        return self._countersign(1, content, transmitter, transmitter_signature,
                                 first_relay, relay_keypair, proof_key, None, rng)

    def make_evidence_hop(self, prev_node: str, this_node: str, this_keypair: KeyPair,
                          v_prev: bytes, ev_prev: Evidence, prev_signature: Signature,
                          proof_key: KeySource, rng: Optional[random.Random] = None) -> Evidence:
        """Relay countersigns the previous relay's signature over (V || EV_prev).

        Args:
            prev_node (str): Relay that forwarded v_prev
            this_node (str): Countersigning relay
            this_keypair (KeyPair): Countersigning relay's key pair
            v_prev (bytes): Peeled packet received from prev_node
            ev_prev (Evidence): prev_node's own committed evidence
            prev_signature (Signature): prev_node's signature over the content
            proof_key (KeySource): Proof key shared with prev_node
            rng (Optional[random.Random]): Nonce source

        Returns:
            Evidence: Submitted EV_i with i = ev_prev.index + 1

        Raises:
            PrevEvidenceNotCommitted: ev_prev not on the chain yet
            BadPrevSignature: prev_node's signature does not cover what was received
        """
        if ev_prev.onchain_handle is None:
            raise PrevEvidenceNotCommitted("unsubmitted")
        content = self.hop_content(v_prev, ev_prev.onchain_handle)
        if not self.signed_by(prev_node, prev_signature, content):
            logger.warning(f"'{this_node}' refused to countersign a packet from '{prev_node}'")
            raise BadPrevSignature(prev_node, this_node)
        return self._countersign(ev_prev.index + 1, content, prev_node, prev_signature,
                                 this_node, this_keypair, proof_key, ev_prev.onchain_handle, rng)

    def make_evidence_final(self, last_relay: str, receiver: str, receiver_keypair: KeyPair,
                            message: Message, ev_n: Evidence, relay_signature: Signature,
                            proof_key: KeySource, now: int,
                            rng: Optional[random.Random] = None) -> Evidence:
        """Receiver countersigns the last relay's signature over (m || EV_n).

        Raises:
            PrevEvidenceNotCommitted: ev_n not on the chain yet
            BadPrevSignature: Signature does not cover the delivered message
            StaleMessage: Message outside the freshness window
        """
        if ev_n.onchain_handle is None:
            raise PrevEvidenceNotCommitted("unsubmitted")
        content = self.hop_content(message.to_canonical(), ev_n.onchain_handle, terminal=True)
        if not self.signed_by(last_relay, relay_signature, content):
            logger.warning(f"'{receiver}' refused to countersign the message from '{last_relay}'")
            raise BadPrevSignature(last_relay, receiver)
        self.ensure_fresh(message, now)
        return self._countersign(ev_n.index + 1, content, last_relay, relay_signature,
                                 receiver, receiver_keypair, proof_key, ev_n.onchain_handle, rng)

    def _countersign(self, index: int, content: bytes, inner_signer: str, inner_signature: Signature,
                     outer_signer: str, outer_keypair: KeyPair, proof_key: KeySource,
                     prev_handle: Optional[Digest], rng: Optional[random.Random]) -> Evidence:
        key = _resolve_key(proof_key)
        record = DoubleSignature(
            content=content,
            inner_signer=inner_signer,
            inner_signature=inner_signature,
            outer_signer=outer_signer,
            outer_signature=sign_with(outer_keypair, inner_signature.sig_bytes),
        )
        evidence = Evidence(index=index, ciphertext=sym_encrypt(key, record.to_canonical(), rng),
                            prev_handle=prev_handle)
        tx = self._ledger.submit(TransactionKind.EVIDENCE, evidence.payload_bytes(), outer_signer)
        evidence = evidence.model_copy(update={"onchain_handle": tx.handle})
        logger.debug(f"EV{index} {tx.handle.short()} submitted by '{outer_signer}'")

        if self._commit_waiter is not None:
            self._commit_waiter.wait(tx.handle)
        return evidence

    # ------------------------------------------------------------ freshness

    def check_freshness(self, message: Message, now: int,
                        window_ms: Optional[int] = None, skew_ms: Optional[int] = None) -> bool:
        """True iff the message is at most window_ms old and not ahead of now by more than the skew."""
        window_ms = self._settings.freshness_window_ms if window_ms is None else window_ms
        skew_ms = self._settings.clock_skew_ms if skew_ms is None else skew_ms
        return now - message.timestamp <= window_ms and message.timestamp <= now + skew_ms

    def ensure_fresh(self, message: Message, now: int) -> None:
        """Raises StaleMessage when check_freshness fails."""
        if not self.check_freshness(message, now):
            logger.warning(f"Discarding message stamped {message.timestamp} at {now}")
            raise StaleMessage(message.timestamp, now)

    # ------------------------------------------------------------ protocol

    def transmit(self, transmitter: str, receiver: str, message: Message, n: int,
                 network: PartyNetwork, rng: Optional[random.Random] = None,
                 circuit: Optional[Circuit] = None) -> TransmitReceipt:
        """Run the whole protocol: choose relays, send, and collect the evidence chain.

        Args:
            transmitter (str): Sending party
            receiver (str): Receiving party
            message (Message): Message to deliver
            n (int): Relay count
            network (PartyNetwork): Network the parties live on
            rng (Optional[random.Random]): Source of relay choice
            circuit (Optional[Circuit]): Pre-selected circuit skeleton, chosen with select_relays otherwise

        Returns:
            TransmitReceipt: n + 1 committed evidence handles and the delivered digest

        Raises:
            NTooSmall: n below the minimum
            InsufficientNodes: Not enough members
            TransmitAborted: A hop failed; carries the committed evidence prefix
        """
        if circuit is None:
            circuit = self.select_relays(network.members(), n, rng or random.Random(), transmitter, receiver)
        n = len(circuit.relays)
        logger.info(f"Session {circuit.session_id}: '{transmitter}' -> '{receiver}' over {n} relays")

        metrics = get_metrics_service()
        started = time.perf_counter()
        if metrics:
            with metrics.track_session_in_progress(n):
                network.launch(transmitter, circuit, message)
        else:
            network.launch(transmitter, circuit, message)
        report = network.session_report(circuit.session_id)

        failure: Optional[Exception] = report.failure
        if failure is None and (report.delivered is None or len(report.evidence_handles) != n + 1):
            failure = MessageDropped(transmitter, receiver)
        if metrics:
            metrics.record_transmit(n, time.perf_counter() - started, failure is None)
        if failure is not None:
            logger.error(f"Session {circuit.session_id} aborted after "
                         f"{len(report.evidence_handles)} evidence records: {failure}")
            raise TransmitAborted(failure, report.evidence_handles)

        handles: List[Digest] = list(report.evidence_handles)
        logger.info(f"Session {circuit.session_id} delivered with {len(handles)} evidence records")
        return TransmitReceipt(
            session_id=circuit.session_id,
            transmitter=transmitter,
            receiver=receiver,
            relays=circuit.relays,
            evidence_handles=handles,
            delivered_digest=digest(report.delivered.to_canonical()),
        )
