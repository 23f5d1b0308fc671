"""Simulated network: simpy transport and clock, ledger sequencing, faults and the event trace."""
import logging
import random
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

import simpy

from ..application.services.disclosure_service import DisclosureService
from ..application.services.onion_service import OnionService
from ..application.services.registry_service import RegistryService
from ..config.settings import Settings, settings as default_settings
from ..domain.exceptions import (
    DomainException,
    EvidenceNotFound,
    MessageDropped,
    PeerUnreachable,
    RegistrationRejected,
    TooFewMembers,
    UnknownTarget,
)
from ..domain.models.crypto import Digest, SymmetricKey
from ..domain.models.disclosure import DisclosureOutcome, Rebuttal
from ..domain.models.ledger import Block, TransactionKind
from ..domain.models.onion import Circuit, Message, SessionReport, TransmitReceipt
from ..domain.models.registry import Identity
from ..domain.models.simnet import Envelope, FaultKind, Trace, TraceEvent, ViewEntry
from ..infrastructure.crypto.primitives import generate_keypair
from ..infrastructure.ledger.ledger import Ledger
from ..infrastructure.ledger.ledger_batch import LedgerBatch
from ..infrastructure.retry.commit_waiter import CommitWaiter
from .node import Node

logger = logging.getLogger(__name__)

T = TypeVar("T")
Trigger = Callable[[TraceEvent], bool]
NodeFactory = Callable[..., Node]

MIN_MEMBERS = 5
_MILESTONES = {"block", "commit", "deliver", "discard", "abort", "drop", "fault", "verdict", "replay"}


class Network:
    """In-process network of protocol nodes sharing one ledger.

    Every packet is a simpy process that waits out the sender's injected delay
    and lands in the recipient's inbox; key agreement and other request/reply
    exchanges between adjacent parties are immediate calls. Logical time is
    ``env.now`` in milliseconds.

    Attributes:
        env (simpy.Environment): Clock and scheduler
        ledger (Ledger): Shared permissioned ledger
        nodes (Dict[str, Node]): Parties by id
        trace (Trace): Global event list
    """

    def __init__(self, party_ids: Sequence[str], miners: Sequence[str], seed: int,
                 app_settings: Optional[Settings] = None):
        """Create the nodes; registration happens in register_all().

        Args:
            party_ids (Sequence[str]): Node ids
            miners (Sequence[str]): Sequencers, used round-robin
            seed (int): Seed for keys, nonces and choices
            app_settings (Optional[Settings]): Protocol settings
        """
        self.seed = seed
        self.settings = app_settings or default_settings
        self.env = simpy.Environment()
        self.rng = random.Random(f"onionchain/{seed}")
        self.ledger = Ledger(miners, clock=self.now)
        self.waiter = CommitWaiter(self.ledger, self.produce_block, self.settings.ledger.commit_poll_attempts)
        self.onion = OnionService(self.ledger, self.settings.onion, self.waiter)
        self.registry = RegistryService(self.ledger, self.settings.registry)
        self.disclosure = DisclosureService(self.ledger, self.onion, self.settings.disclosure,
                                            batch_factory=self.batch, commit_waiter=self.waiter)
        self.trace = Trace()
        self.evidence_before_replay: Optional[int] = None

        self._sessions: Dict[str, SessionReport] = {}
        self._turn = 0
        self._drops: Dict[str, int] = {}
        self._delays: Dict[str, int] = {}
        self._armed: List[Tuple[Trigger, FaultKind, str, int]] = []

        self.nodes: Dict[str, Node] = {}
        for party in party_ids:
            keypair = generate_keypair(seed=f"{seed}:{party}", scheme=self.settings.crypto.signature_scheme)
            self.nodes[party] = Node(party, keypair, self, self._node_rng(party))

    def _node_rng(self, party_id: str, role: str = "") -> random.Random:
        return random.Random(f"{self.seed}:{party_id}:{role}")

    # ------------------------------------------------------------ membership and ledger

    def register_all(self) -> None:
        """Register every node in one block sealed by the first miner.

        Raises:
            RegistrationRejected: A node's request was rejected
        """
        sequencer = self._next_miner()
        with LedgerBatch(self.ledger, sequencer, self.nodes[sequencer].keypair) as batch:
            for party, node in self.nodes.items():
                request = RegistryService.build_registration_request(Identity(id_string=party), node.keypair)
                decision = self.registry.validate_registration(request, batch=batch)
                if not decision.accepted:
                    raise RegistrationRejected(party, decision.reason.value)
                self.record("register", party)
        self.record("block", sequencer, detail=f"height={self.ledger.height} txs={len(self.nodes)}")

    def add_party(self, party_id: str) -> Digest:
        """Join a new party and commit its registration.

        Returns:
            Digest: Committed registration handle

        Raises:
            RegistrationRejected: The request was rejected, for instance a party id already in use
        """
        if party_id in self.nodes:
            raise RegistrationRejected(party_id, "identity already joined")
        keypair = generate_keypair(seed=f"{self.seed}:{party_id}", scheme=self.settings.crypto.signature_scheme)
        request = RegistryService.build_registration_request(Identity(id_string=party_id), keypair)
        decision = self.registry.validate_registration(request)
        if not decision.accepted:
            raise RegistrationRejected(party_id, decision.reason.value)
        self.wait_commit(decision.handle)
        self.nodes[party_id] = Node(party_id, keypair, self, self._node_rng(party_id))
        self.record("register", party_id, detail=decision.handle.short())
        return decision.handle

    def members(self) -> List[str]:
        return self.ledger.members()

    def now(self) -> int:
        return int(self.env.now)

    def _next_miner(self) -> str:
        miner = self.ledger.miners[self._turn % len(self.ledger.miners)]
        self._turn += 1
        return miner

    def produce_block(self) -> Block:
        """Let the next miner in turn seal the pending transactions.

        Raises:
            EmptyPending: Nothing admissible is pending
        """
        miner = self._next_miner()
        block = self.ledger.commit_pending(miner, self.nodes[miner].keypair)
        self.record("block", miner, detail=f"height={block.header.height} txs={len(block.body)}")
        return block

    def batch(self) -> LedgerBatch:
        miner = self._next_miner()
        return LedgerBatch(self.ledger, miner, self.nodes[miner].keypair)

    def wait_commit(self, handle: Digest) -> None:
        self.waiter.wait(handle)

    def evidence_count(self) -> int:
        return sum(1 for _ in self.ledger.transactions(TransactionKind.EVIDENCE))

    def mark_replay(self) -> None:
        self.evidence_before_replay = self.evidence_count()

    def replace_node(self, party_id: str, factory: NodeFactory, **kwargs) -> Node:
        """Swap a node's behaviour, keeping its identity and keys.

        Raises:
            UnknownTarget: party_id is not in the network
        """
        if party_id not in self.nodes:
            raise UnknownTarget(party_id)
        node = factory(party_id, self.nodes[party_id].keypair, self, self._node_rng(party_id, "script"), **kwargs)
        self.nodes[party_id] = node
        logger.debug(f"'{party_id}' now runs {type(node).__name__}")
        return node

    # ------------------------------------------------------------ trace

    def record(self, kind: str, actor: str, peer: Optional[str] = None,
               session_id: Optional[str] = None, detail: str = "") -> TraceEvent:
        event = TraceEvent(seq=len(self.trace.events), time_ms=self.now(), kind=kind, actor=actor,
                           peer=peer, session_id=session_id, detail=detail)
        self.trace.events.append(event)
        logger.log(logging.INFO if kind in _MILESTONES else logging.DEBUG, event.to_json())
        self._fire_triggers(event)
        return event

    def view_of(self, party_id: str) -> List[ViewEntry]:
        return list(self.nodes[party_id].view)

    def export_trace(self, path: Union[str, Path]) -> Path:
        """Write the trace as line-delimited JSON."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.trace.to_json_lines(), encoding="utf-8")
        logger.info(f"Exported {len(self.trace)} trace events to {path}")
        return path

    # ------------------------------------------------------------ faults

    def inject_fault(self, kind: Union[FaultKind, str], target: str, value: int = 0,
                     trigger: Optional[Trigger] = None) -> None:
        """Apply a fault now, or when a trace event matches trigger.

        Args:
            kind (Union[FaultKind, str]): node_offline, drop_message, delay or plea_delay
            target (str): Affected party
            value (int): Delay in ms, plea delay in blocks, or number of messages to drop (at least one)
            trigger (Optional[Trigger]): Arms the fault until a matching event is recorded

        Raises:
            UnknownTarget: target is not in the network
        """
        kind = FaultKind(kind)
        if target not in self.nodes:
            raise UnknownTarget(target)
        if trigger is None:
            self._apply_fault(kind, target, value)
        else:
            self._armed.append((trigger, kind, target, value))

    def _fire_triggers(self, event: TraceEvent) -> None:
        fired = [armed for armed in self._armed if armed[0](event)]
        if not fired:
            return
        self._armed = [armed for armed in self._armed if armed not in fired]
        for _, kind, target, value in fired:
            self._apply_fault(kind, target, value)

    def _apply_fault(self, kind: FaultKind, target: str, value: int) -> None:
        if kind == FaultKind.NODE_OFFLINE:
            self.nodes[target].online = False
        elif kind == FaultKind.DROP_MESSAGE:
            self._drops[target] = self._drops.get(target, 0) + max(1, value)
        elif value <= 0:
            return
        elif kind == FaultKind.PLEA_DELAY:
            self.nodes[target].plea_delay_blocks = value
        else:
            self._delays[target] = value
        self.record("fault", target, detail=f"{kind.value}={value}")

    def _consume_drop(self, party_id: str) -> bool:
        if self._drops.get(party_id, 0) <= 0:
            return False
        self._drops[party_id] -= 1
        return True

    # ------------------------------------------------------------ transport

    def send(self, envelope: Envelope) -> None:
        """Schedule delivery of a packet; offline senders and drop faults lose it."""
        if not self.nodes[envelope.sender].online or self._consume_drop(envelope.sender):
            self._dropped(envelope)
            return
        self.env.process(self._deliver(envelope, self._delays.get(envelope.sender, 0)))

    def _deliver(self, envelope: Envelope, delay: int):
        if delay:
            yield self.env.timeout(delay)
        recipient = self.nodes.get(envelope.recipient)
        if recipient is None or not recipient.online:
            self._dropped(envelope)
            return
        yield recipient.inbox.put(envelope)

    def _dropped(self, envelope: Envelope) -> None:
        self.record("drop", envelope.sender, envelope.recipient, envelope.session_id)
        self.note_failure(envelope.session_id, MessageDropped(envelope.sender, envelope.recipient))

    def request(self, sender: str, recipient: str, kind: str, call: Callable[[Node], T],
                session_id: Optional[str] = None) -> T:
        """Synchronous request/reply between two parties.

        Raises:
            PeerUnreachable: recipient is offline or unknown
        """
        node = self.nodes.get(recipient)
        if node is None or not node.online:
            self.record("unreachable", sender, recipient, session_id, kind)
            raise PeerUnreachable(recipient)
        self.record(kind, sender, recipient, session_id)
        self.nodes[sender].observe(kind, recipient)
        node.observe(kind, sender)
        return call(node)

    # ------------------------------------------------------------ sessions

    def _session(self, session_id: str) -> SessionReport:
        return self._sessions.setdefault(session_id, SessionReport(session_id=session_id))

    def note_evidence(self, session_id: str, handle: Digest) -> None:
        self._session(session_id).evidence_handles.append(handle)

    def note_delivery(self, session_id: str, message: Message) -> None:
        self._session(session_id).delivered = message

    def note_discard(self, session_id: str) -> None:
        self._session(session_id).discarded = True

    def note_failure(self, session_id: str, failure: Exception) -> None:
        report = self._session(session_id)
        if report.failure is None:
            report.failure = failure

    def session_report(self, session_id: str) -> SessionReport:
        return self._session(session_id)

    def launch(self, transmitter: str, circuit: Circuit, message: Message) -> None:
        """Start a session at the transmitter and run the simulation until it is idle."""
        self._session(circuit.session_id)
        self.env.process(self._start(self.nodes[transmitter], circuit, message))
        self.env.run()

    def _start(self, node: Node, circuit: Circuit, message: Message):
        yield self.env.timeout(0)
        session = circuit.session_id
        self.record("launch", node.party_id, session_id=session, detail=f"{len(circuit.relays)} relays")
        try:
            if not node.online:
                raise PeerUnreachable(node.party_id)
            node.start_session(circuit, message)
        except DomainException as exc:
            logger.error(f"'{node.party_id}' could not start session {session}: {exc}")
            self.record("abort", node.party_id, session_id=session, detail=str(exc))
            self.note_failure(session, exc)

    def transmit(self, transmitter: str, receiver: str, payload: Union[bytes, Message], n: int,
                 circuit: Optional[Circuit] = None) -> TransmitReceipt:
        """Send a payload stamped with the current time; see OnionService.transmit."""
        message = payload if isinstance(payload, Message) else Message(payload=payload, timestamp=self.now())
        return self.onion.transmit(transmitter, receiver, message, n, self, self.rng, circuit=circuit)

    # ------------------------------------------------------------ disclosure

    def disclose(self, receiver: str, session_id: str, accused: Optional[Message] = None) -> DisclosureOutcome:
        """Have a receiver accuse the message of a session, collect votes and run the walk.

        Args:
            receiver (str): Receiver of the session
            session_id (str): Session whose terminal evidence is accused
            accused (Optional[Message]): Message to accuse, the receiver's own choice by default

        Returns:
            DisclosureOutcome: Culprit, plea transcript and confession

        Raises:
            EvidenceNotFound: The receiver holds no evidence for the session
            DisclosureNotApproved: Votes fell short of a majority
        """
        node = self.nodes[receiver]
        evidence = node.evidence.get(session_id)
        if evidence is None:
            raise EvidenceNotFound(f"session {session_id}")
        accused = accused or node.accusation(session_id)
        tx = self.disclosure.request_disclosure(receiver, accused, evidence.onchain_handle,
                                                node.proof_keys[evidence.onchain_handle])
        self.record("disclose", receiver, session_id=session_id, detail=tx.handle.short())
        self.collect_votes(tx.handle)

        outcome = self.disclosure.run_disclosure(tx.handle, self)
        culprit = outcome.final_culprit
        self.record("verdict", culprit.party_id, session_id=session_id, detail=culprit.reason.value)
        return outcome

    def collect_votes(self, request_handle: Digest) -> None:
        """Every online node votes; drop faults lose votes."""
        request = self.disclosure.get_request(request_handle)
        for party in sorted(self.nodes):
            node = self.nodes[party]
            if not node.online:
                continue
            if self._consume_drop(party):
                self.record("drop", party, detail=f"vote on {request_handle.short()}")
                continue
            self.disclosure.cast_vote(party, node.keypair, request_handle, node.vote(request))
        if self.ledger.pending:
            self.produce_block()

    def pass_blocks(self, count: int) -> None:
        """Let count block intervals of simulated time pass, sealing whatever is pending at each turn."""
        interval = self.settings.ledger.block_interval_ms
        for _ in range(max(0, count)):
            self.env.run(until=self.env.now + interval)
            if self.ledger.pending:
                self.produce_block()

    def _demand(self, party_id: str, kind: str, handle: Optional[Digest], timeout_blocks: int,
                call: Callable[[Node], Optional[T]]) -> Optional[T]:
        """Ask a named party for its answer; silence until timeout_blocks have passed is a refusal."""
        node = self.nodes.get(party_id)
        detail = handle.short() if handle else ""
        latency = node.plea_delay_blocks if node is not None and node.online else None
        if latency is None or latency > timeout_blocks:
            self.pass_blocks(timeout_blocks)
            self.record("plea-timeout", party_id, detail=f"{kind} {detail}".strip())
            return None
        self.pass_blocks(latency)
        self.record(kind, party_id, detail=detail)
        node.observe(kind)
        answer = call(node)
        if answer is None:
            self.pass_blocks(timeout_blocks - latency)
            self.record("plea-timeout", party_id, detail=f"{kind} {detail}".strip())
        return answer

    def release_proof_key(self, party_id: str, evidence_handle: Digest,
                          timeout_blocks: int) -> Optional[SymmetricKey]:
        return self._demand(party_id, "plea", evidence_handle, timeout_blocks,
                            lambda node: node.release_proof_key(evidence_handle))

    def rebut(self, party_id: str, pleader: str, prev_handle: Optional[Digest],
              timeout_blocks: int) -> Optional[Rebuttal]:
        return self._demand(party_id, "rebut", prev_handle, timeout_blocks,
                            lambda node: node.rebut(pleader, prev_handle))

    def confess(self, party_id: str, evidence_handle: Digest, timeout_blocks: int) -> Optional[List[SymmetricKey]]:
        return self._demand(party_id, "confess", evidence_handle, timeout_blocks,
                            lambda node: node.confess(evidence_handle))


def spawn_network(members: Optional[int] = None,
                  miners: Optional[Union[int, Sequence[str]]] = None,
                  seed: Optional[int] = None,
                  app_settings: Optional[Settings] = None) -> Network:
    """Create and register a deterministic network.

    Args:
        members (Optional[int]): Node count, configured count by default
        miners (Optional[Union[int, Sequence[str]]]): Miner count or ids, configured ones by default
        seed (Optional[int]): Seed, configured seed by default
        app_settings (Optional[Settings]): Settings to use

    Returns:
        Network: Nodes node-00 .. node-NN, all registered

    Raises:
        TooFewMembers: Fewer than five members
        UnknownTarget: A configured miner is not a node
    """
    app_settings = app_settings or default_settings
    count = app_settings.simulation.members if members is None else members
    if count < MIN_MEMBERS:
        raise TooFewMembers(count, MIN_MEMBERS)
    seed = app_settings.simulation.seed if seed is None else seed

    party_ids = [f"node-{index:02d}" for index in range(count)]
    if miners is None:
        miners = app_settings.ledger.miners or app_settings.simulation.miners
    miner_ids = party_ids[:max(1, miners)] if isinstance(miners, int) else list(miners)
    for miner in miner_ids:
        if miner not in party_ids:
            raise UnknownTarget(miner)

    network = Network(party_ids, miner_ids, seed, app_settings)
    network.register_all()
    logger.info(f"Spawned {count} nodes, miners {miner_ids}, seed {seed}")
    return network
