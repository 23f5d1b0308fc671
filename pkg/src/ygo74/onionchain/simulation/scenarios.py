"""Scripted runs: an honest session or one attack, followed by the disclosure the script calls for."""
import logging
import random
from typing import Callable, Dict, Optional, Tuple

from ..domain.exceptions import DomainException, TransmitAborted
from ..domain.models.onion import Circuit, Message
from ..domain.models.simnet import AdversaryKind, AdversaryScript, ScenarioOutcome, Trace
from ..infrastructure.crypto.primitives import random_bytes
from ..infrastructure.observability.metrics_service import get_metrics_service
from .adversaries import (
    CalumniatingReceiver,
    ColludingRelay,
    ColludingTransmitter,
    MaliciousMessenger,
    MaliciousTransmitter,
    ReplayRelay,
)
from .network import Network

logger = logging.getLogger(__name__)


class _Run:
    """State shared by the steps of one scenario."""

    def __init__(self, network: Network, script: AdversaryScript, circuit: Circuit, payload: bytes,
                 rng: random.Random):
        self.network = network
        self.script = script
        self.circuit = circuit
        self.payload = payload
        self.rng = rng
        self.outcome = ScenarioOutcome(kind=script.kind, honest_relays=set(circuit.relays))

    @property
    def transmitter(self) -> str:
        return self.circuit.transmitter

    @property
    def receiver(self) -> str:
        return self.circuit.receiver

    def transmit(self, circuit: Optional[Circuit] = None) -> bool:
        """Run one session; an abort is recorded as an error, not raised."""
        circuit = circuit or self.circuit
        message = Message(payload=self.payload, timestamp=self.network.now())
        try:
            self.outcome.receipt = self.network.transmit(self.transmitter, self.receiver, message,
                                                         len(circuit.relays), circuit=circuit)
            ok = True
        except TransmitAborted as exc:
            logger.info(f"Scenario {self.script.kind.value}: session {circuit.session_id} aborted: {exc}")
            self.outcome.errors.append(str(exc))
            ok = False
        report = self.network.session_report(circuit.session_id)
        self.outcome.delivered = self.outcome.delivered or report.delivered is not None
        self.outcome.discarded = self.outcome.discarded or report.discarded
        return ok

    def disclose(self, receiver: str, session_id: str) -> None:
        try:
            disclosure = self.network.disclose(receiver, session_id)
        except DomainException as exc:
            logger.error(f"Scenario {self.script.kind.value}: disclosure failed: {exc}")
            self.outcome.errors.append(str(exc))
            return
        self.outcome.disclosure = disclosure
        self.outcome.culprit = disclosure.final_culprit


def _honest(run: _Run) -> None:
    run.outcome.expected_culprits = {run.transmitter}
    if run.transmit():
        run.disclose(run.receiver, run.circuit.session_id)


def _malicious_transmitter(run: _Run) -> None:
    network = run.network
    network.replace_node(run.transmitter, MaliciousTransmitter, script=run.script)
    run.payload = run.script.fake_payload
    run.outcome.expected_culprits = {run.transmitter}
    if run.transmit():
        run.disclose(run.receiver, run.circuit.session_id)
        return

    retry = network.onion.select_relays(network.members(), len(run.circuit.relays), run.rng,
                                        run.transmitter, run.receiver)
    run.outcome.honest_relays |= set(retry.relays)
    if run.transmit(retry):
        run.disclose(run.receiver, retry.session_id)


def _malicious_messenger(run: _Run) -> None:
    messenger_id = run.circuit.relays[1]
    messenger = run.network.replace_node(messenger_id, MaliciousMessenger, script=run.script)
    run.outcome.expected_culprits = {messenger_id}
    run.outcome.honest_relays.discard(messenger_id)
    run.transmit()
    if messenger.forged is None:
        run.outcome.errors.append(f"'{messenger_id}' never substituted a packet")
        return
    fake_session, fake_receiver = messenger.forged
    run.disclose(fake_receiver, fake_session)


def _replay(run: _Run) -> None:
    replayer = run.circuit.relays[-1]
    run.network.replace_node(replayer, ReplayRelay, script=run.script)
    run.outcome.honest_relays.discard(replayer)
    run.transmit()
    run.outcome.evidence_before_replay = run.network.evidence_before_replay


def _calumniating(run: _Run) -> None:
    run.network.replace_node(run.receiver, CalumniatingReceiver, script=run.script)
    run.outcome.expected_culprits = {run.receiver}
    if run.transmit():
        run.disclose(run.receiver, run.circuit.session_id)


def _collusion(run: _Run) -> None:
    first = run.circuit.relays[0]
    script = run.script.model_copy(update={"colluders": frozenset({run.transmitter, first})})
    run.script = script
    run.network.replace_node(run.transmitter, ColludingTransmitter, script=script)
    run.network.replace_node(first, ColludingRelay, script=script)
    run.payload = script.fake_payload
    run.outcome.expected_culprits = set(script.colluders)
    run.outcome.honest_relays.discard(first)
    if run.transmit():
        run.disclose(run.receiver, run.circuit.session_id)


_SCRIPTS: Dict[AdversaryKind, Callable[[_Run], None]] = {
    AdversaryKind.HONEST: _honest,
    AdversaryKind.MALICIOUS_TRANSMITTER: _malicious_transmitter,
    AdversaryKind.MALICIOUS_MESSENGER: _malicious_messenger,
    AdversaryKind.REPLAY: _replay,
    AdversaryKind.CALUMNIATING: _calumniating,
    AdversaryKind.COLLUSION: _collusion,
}


def run_scenario(network: Network, script: Optional[AdversaryScript] = None,
                 n_relays: int = 3, payload_bits: int = 128) -> Tuple[Trace, ScenarioOutcome]:
    """Pick endpoints and relays, install the script's adversaries, transmit and disclose.

    Args:
        network (Network): Spawned network; adversaries replace the chosen nodes in place
        script (Optional[AdversaryScript]): Attack to run, an honest session by default
        n_relays (int): Circuit length
        payload_bits (int): Size of the random payload for scripts that do not send m_fake

    Returns:
        Tuple[Trace, ScenarioOutcome]: Global trace and what the run established

    Raises:
        NTooSmall: n_relays below the minimum
        InsufficientNodes: Network too small for the circuit
    """
    script = script or AdversaryScript.honest()
    rng = random.Random(f"scenario/{network.seed}/{script.kind.value}")
    members = network.members()
    transmitter, receiver = rng.sample(members, 2)
    circuit = network.onion.select_relays(members, n_relays, rng, transmitter, receiver)
    payload = random_bytes((payload_bits + 7) // 8, rng)

    network.record("scenario", transmitter, receiver, circuit.session_id, script.kind.value)
    run = _Run(network, script, circuit, payload, rng)
    _SCRIPTS[script.kind](run)

    outcome = run.outcome
    outcome.evidence_count = network.evidence_count()
    culprit = outcome.culprit.party_id if outcome.culprit else "none"
    logger.info(f"Scenario {script.kind.value}: culprit {culprit}, defeated={outcome.defeated}")
    metrics = get_metrics_service()
    if metrics:
        metrics.record_scenario(script.kind.value, outcome.defeated)
    return network.trace, outcome
