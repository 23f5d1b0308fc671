"""Tests for OnionService class."""
import random

import pytest

from ygo74.onionchain.application.services.onion_service import OnionService
from ygo74.onionchain.config.settings import OnionSettings
from ygo74.onionchain.domain.exceptions import (
    AuthenticationFailure,
    BadPrevSignature,
    BadTransmitterSignature,
    InsufficientNodes,
    NTooSmall,
    PrevEvidenceNotCommitted,
    StaleMessage,
)
from ygo74.onionchain.domain.models.crypto import KeyPurpose
from ygo74.onionchain.domain.models.onion import Circuit, Evidence, EvidenceContent, Message
from ygo74.onionchain.infrastructure.crypto.primitives import generate_symmetric_key, sign_with
from ygo74.onionchain.infrastructure.ledger.ledger import Ledger


def _keyed_circuit(n: int, rng: random.Random) -> Circuit:
    relays = [f"relay-{i}" for i in range(n)]
    path = ["t", *relays]
    keys = [generate_symmetric_key(KeyPurpose.HOP, (path[i], relays[i]), rng=rng, key_bytes=16) for i in range(n)]
    return Circuit(session_id="s", transmitter="t", receiver="r", relays=relays, hop_keys=keys)


class TestCircuitsAndOnions:
    """Test suite for relay selection and onion layering."""

    @pytest.fixture
    def service(self, ledger: Ledger) -> OnionService:
        return OnionService(ledger, OnionSettings())

    def test_select_relays_excludes_endpoints(self, service: OnionService, ledger: Ledger):
        """Test relays are distinct members other than T and R."""
        # act
        circuit = service.select_relays(ledger.members(), 3, random.Random(1), "alice", "bob")

        # assert
        assert len(set(circuit.relays)) == 3
        assert not {"alice", "bob"} & set(circuit.relays)
        assert set(circuit.relays) <= set(ledger.members())
        assert len(circuit.session_id) == 16

    def test_select_relays_is_seeded(self, service: OnionService, ledger: Ledger):
        first = service.select_relays(ledger.members(), 4, random.Random(9), "alice", "bob")
        second = service.select_relays(ledger.members(), 4, random.Random(9), "alice", "bob")
        assert first == second

    def test_fewer_than_three_relays(self, service: OnionService, ledger: Ledger):
        with pytest.raises(NTooSmall):
            service.select_relays(ledger.members(), 2, random.Random(1), "alice", "bob")

    def test_not_enough_members(self, service: OnionService, ledger: Ledger):
        """Test seven members leave five eligible relays."""
        with pytest.raises(InsufficientNodes):
            service.select_relays(ledger.members(), 6, random.Random(1), "alice", "bob")

    @pytest.mark.parametrize("n", [3, 5, 10])
    def test_peeling_in_order_recovers_message(self, n: int):
        """Test each relay sees only its own directive and the last layer yields m."""
        # arrange
        rng = random.Random(n)
        circuit = _keyed_circuit(n, rng)
        message = Message(payload=b"payload", timestamp=5)
        onion = OnionService.build_onion(circuit, message, rng)

        # act
        current = onion
        targets = []
        for key in circuit.hop_keys:
            layer = OnionService.peel_layer(key, current)
            targets.append(layer.directive.target)
            current = layer.inner

        # assert
        assert targets == [*circuit.relays[1:], "r"]
        assert current == message

    def test_layer_cannot_be_skipped(self):
        """Test the second key does not open the outer layer."""
        # arrange
        rng = random.Random(3)
        circuit = _keyed_circuit(3, rng)
        onion = OnionService.build_onion(circuit, Message(payload=b"m", timestamp=0), rng)

        # act & assert
        with pytest.raises(AuthenticationFailure):
            OnionService.peel_layer(circuit.hop_keys[1], onion)

    def test_build_requires_hop_keys(self):
        circuit = Circuit(session_id="s", transmitter="t", receiver="r", relays=["a", "b", "c"])
        with pytest.raises(ValueError):
            OnionService.build_onion(circuit, Message(payload=b"m", timestamp=0))

    @pytest.mark.parametrize("timestamp,now,fresh", [
        (0, 30_000, True),
        (0, 30_001, False),
        (35_000, 30_000, True),
        (35_001, 30_000, False),
    ])
    def test_freshness_window(self, service: OnionService, timestamp: int, now: int, fresh: bool):
        """Test the default 30 s window and 5 s skew bounds."""
        message = Message(payload=b"m", timestamp=timestamp)
        assert service.check_freshness(message, now) is fresh

    def test_stale_message_raises(self, service: OnionService):
        with pytest.raises(StaleMessage):
            service.ensure_fresh(Message(payload=b"m", timestamp=0), 60_000)


class TestEvidenceChain:
    """Test suite for the countersigned evidence records.

    alice transmits over bob, carol and dave to erin.
    """

    @pytest.fixture
    def service(self, ledger: Ledger) -> OnionService:
        return OnionService(ledger, OnionSettings())

    @pytest.fixture
    def proof_key(self):
        return generate_symmetric_key(KeyPurpose.PROOF, ("alice", "bob"), rng=random.Random(11), key_bytes=16)

    @pytest.fixture
    def seal(self, ledger: Ledger, keypairs: dict):
        return lambda: ledger.commit_pending("alice", keypairs["alice"])

    @pytest.fixture
    def ev0(self):
        rng = random.Random(5)
        circuit = _keyed_circuit(3, rng)
        return OnionService.build_onion(circuit, Message(payload=b"m", timestamp=0), rng)

    def test_first_relay_countersigns(self, service: OnionService, keypairs: dict, proof_key, ev0, seal):
        """Test EV1 opens under the proof key and holds both signatures."""
        # arrange
        signature = sign_with(keypairs["alice"], OnionService.initial_content(ev0))

        # act
        ev1 = service.make_evidence_initial("alice", "bob", keypairs["bob"], ev0, signature, proof_key)
        seal()
        record = OnionService.open_evidence(service.evidence_at(ev1.onchain_handle), proof_key)

        # assert
        assert ev1.index == 1
        assert ev1.prev_handle is None
        assert record.inner_signer == "alice"
        assert record.outer_signer == "bob"
        assert record.content == ev0.ciphertext

    def test_first_relay_refuses_foreign_signature(self, service: OnionService, keypairs: dict, proof_key, ev0):
        signature = sign_with(keypairs["frank"], OnionService.initial_content(ev0))
        with pytest.raises(BadTransmitterSignature):
            service.make_evidence_initial("alice", "bob", keypairs["bob"], ev0, signature, proof_key)

    def test_hop_requires_committed_predecessor(self, service: OnionService, keypairs: dict, proof_key, ev0):
        """Test a relay cannot countersign before the previous evidence is on chain."""
        # arrange
        signature = sign_with(keypairs["alice"], OnionService.initial_content(ev0))
        ev1 = service.make_evidence_initial("alice", "bob", keypairs["bob"], ev0, signature, proof_key)

        # act & assert
        with pytest.raises(PrevEvidenceNotCommitted):
            service.make_evidence_hop("bob", "carol", keypairs["carol"], b"v1", ev1,
                                      sign_with(keypairs["bob"], b"anything"), proof_key)

    def test_hop_links_previous_evidence(self, service: OnionService, keypairs: dict, proof_key, ev0, seal):
        """Test EV2 content binds the packet and EV1, and names EV1 as predecessor."""
        # arrange
        ev1 = service.make_evidence_initial("alice", "bob", keypairs["bob"], ev0,
                                            sign_with(keypairs["alice"], ev0.ciphertext), proof_key)
        seal()
        content = service.hop_content(b"v1", ev1.onchain_handle)

        # act
        ev2 = service.make_evidence_hop("bob", "carol", keypairs["carol"], b"v1", ev1,
                                        sign_with(keypairs["bob"], content), proof_key)
        seal()
        record = OnionService.open_evidence(service.evidence_at(ev2.onchain_handle), proof_key)

        # assert
        assert ev2.index == 2
        assert ev2.prev_handle == ev1.onchain_handle
        assert EvidenceContent.from_canonical(record.content).packet == b"v1"
        assert EvidenceContent.from_canonical(record.content).prev_evidence == ev1.ciphertext

    def test_hop_refuses_signature_over_other_packet(self, service: OnionService, keypairs: dict,
                                                    proof_key, ev0, seal):
        # arrange
        ev1 = service.make_evidence_initial("alice", "bob", keypairs["bob"], ev0,
                                            sign_with(keypairs["alice"], ev0.ciphertext), proof_key)
        seal()
        other = service.hop_content(b"other", ev1.onchain_handle)

        # act & assert
        with pytest.raises(BadPrevSignature):
            service.make_evidence_hop("bob", "carol", keypairs["carol"], b"v1", ev1,
                                      sign_with(keypairs["bob"], other), proof_key)

    def test_receiver_discards_stale_message(self, service: OnionService, keypairs: dict, proof_key, ev0, seal):
        """Test the final countersignature checks freshness after the signature."""
        # arrange
        ev1 = service.make_evidence_initial("alice", "bob", keypairs["bob"], ev0,
                                            sign_with(keypairs["alice"], ev0.ciphertext), proof_key)
        seal()
        message = Message(payload=b"m", timestamp=0)
        content = service.hop_content(message.to_canonical(), ev1.onchain_handle, terminal=True)

        # act & assert
        with pytest.raises(StaleMessage):
            service.make_evidence_final("bob", "erin", keypairs["erin"], message, ev1,
                                        sign_with(keypairs["bob"], content), proof_key, now=100_000)

    def test_unknown_evidence_handle(self, service: OnionService, ledger: Ledger):
        with pytest.raises(PrevEvidenceNotCommitted):
            service.committed_evidence(ledger.registration_of("bob").handle)

    def test_evidence_model_rejects_index_zero(self):
        with pytest.raises(ValueError):
            Evidence(index=0, ciphertext=b"")
