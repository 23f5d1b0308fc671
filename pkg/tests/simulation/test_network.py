"""Tests for the simulated network."""
import pytest

from ygo74.onionchain.config.settings import Settings
from ygo74.onionchain.domain.exceptions import (
    BadTransmitterSignature,
    EvidenceNotFound,
    MessageDropped,
    PeerUnreachable,
    RegistrationRejected,
    TooFewMembers,
    TransmitAborted,
    UnknownTarget,
)
from ygo74.onionchain.domain.models.simnet import FaultKind
from ygo74.onionchain.infrastructure.ledger.chain_store import load_chain, save_chain
from ygo74.onionchain.infrastructure.ledger.ledger import verify_chain
from ygo74.onionchain.simulation.network import MIN_MEMBERS, Network, spawn_network


def _kinds(network: Network):
    return [(e.kind, e.actor, e.peer, e.detail) for e in network.trace]


class TestSpawn:
    """Test suite for network creation."""

    def test_members_are_registered(self, network: Network):
        assert network.members() == [f"node-{i:02d}" for i in range(10)]
        assert network.ledger.height == 1
        assert network.ledger.miners == ["node-00"]

    def test_too_few_members(self, app_settings: Settings):
        with pytest.raises(TooFewMembers):
            spawn_network(members=MIN_MEMBERS - 1, seed=1, app_settings=app_settings)

    def test_unknown_miner(self, app_settings: Settings):
        with pytest.raises(UnknownTarget):
            spawn_network(members=5, miners=["node-99"], seed=1, app_settings=app_settings)

    def test_miner_count_takes_first_nodes(self, app_settings: Settings):
        network = spawn_network(members=6, miners=2, seed=1, app_settings=app_settings)
        assert network.ledger.miners == ["node-00", "node-01"]

    def test_same_seed_same_run(self, app_settings: Settings):
        """Test two networks with one seed produce identical traces and chains."""
        # arrange
        first = spawn_network(members=8, seed=21, app_settings=app_settings)
        second = spawn_network(members=8, seed=21, app_settings=app_settings)

        # act
        receipt_a = first.transmit("node-03", "node-05", b"same", 3)
        receipt_b = second.transmit("node-03", "node-05", b"same", 3)

        # assert
        assert receipt_a == receipt_b
        assert first.trace.to_json_lines() == second.trace.to_json_lines()
        assert first.ledger.blocks == second.ledger.blocks

    def test_add_party(self, network: Network):
        """Test a late joiner is committed and usable as a relay."""
        # act
        handle = network.add_party("node-late")

        # assert
        assert network.ledger.is_committed(handle)
        assert "node-late" in network.members()
        with pytest.raises(RegistrationRejected):
            network.add_party("node-late")


class TestTransmission:
    """Test suite for sessions over the simulated transport."""

    @pytest.mark.parametrize("n", [3, 5])
    def test_receipt_holds_committed_evidence(self, network: Network, n: int):
        # act
        receipt = network.transmit("node-01", "node-02", b"payload", n)

        # assert
        assert len(receipt.evidence_handles) == n + 1
        assert all(network.ledger.is_committed(h) for h in receipt.evidence_handles)
        assert network.nodes["node-02"].delivered[receipt.session_id].payload == b"payload"
        assert verify_chain(network.ledger)

    def test_relays_see_only_neighbours(self, network: Network):
        """Test each relay's view names only its predecessor and successor."""
        # arrange
        receipt = network.transmit("node-01", "node-02", b"payload", 3)
        path = ["node-01", *receipt.relays, "node-02"]

        # act & assert
        for position in range(1, len(path) - 1):
            relay = path[position]
            peers = {entry.peer for entry in network.view_of(relay) if entry.peer}
            assert peers <= {path[position - 1], path[position + 1]}, relay
        receiver_peers = {entry.peer for entry in network.view_of("node-02") if entry.peer}
        assert "node-01" not in receiver_peers

    def test_offline_relay_aborts_with_committed_prefix(self, network: Network):
        """Test a relay going offline once EV2 commits leaves exactly two evidence records."""
        # arrange
        circuit = network.onion.select_relays(network.members(), 3, network.rng, "node-01", "node-02")
        victim = circuit.relays[2]
        network.inject_fault(
            FaultKind.NODE_OFFLINE, victim,
            trigger=lambda event: event.kind == "commit" and event.detail.startswith("EV2"),
        )

        # act
        with pytest.raises(TransmitAborted) as info:
            network.transmit("node-01", "node-02", b"payload", 3, circuit=circuit)

        # assert
        assert len(info.value.committed) == 2
        assert isinstance(info.value.cause, MessageDropped)
        assert network.trace.of_kind("drop", circuit.session_id)

    def test_offline_first_relay_is_unreachable(self, network: Network):
        # arrange
        circuit = network.onion.select_relays(network.members(), 3, network.rng, "node-01", "node-02")
        network.inject_fault(FaultKind.NODE_OFFLINE, circuit.relays[0])

        # act
        with pytest.raises(TransmitAborted) as info:
            network.transmit("node-01", "node-02", b"payload", 3, circuit=circuit)

        # assert
        assert isinstance(info.value.cause, PeerUnreachable)
        assert info.value.committed == []

    def test_dropped_packet(self, network: Network):
        network.inject_fault(FaultKind.DROP_MESSAGE, "node-01", 1)
        with pytest.raises(TransmitAborted) as info:
            network.transmit("node-01", "node-02", b"payload", 3)
        assert isinstance(info.value.cause, MessageDropped)

    def test_delay_moves_the_clock(self, network: Network):
        """Test a delay fault postpones delivery in logical time."""
        # arrange
        network.inject_fault(FaultKind.DELAY, "node-01", 250)

        # act
        receipt = network.transmit("node-01", "node-02", b"payload", 3)

        # assert
        deliver = network.trace.of_kind("deliver", receipt.session_id)[0]
        assert deliver.time_ms >= 250

    def test_zero_delay_changes_nothing(self, app_settings: Settings):
        """Test a zero delay records no fault and leaves the trace as without it."""
        # arrange
        plain = spawn_network(members=8, seed=5, app_settings=app_settings)
        delayed = spawn_network(members=8, seed=5, app_settings=app_settings)
        delayed.inject_fault(FaultKind.DELAY, "node-01", 0)

        # act
        plain.transmit("node-01", "node-02", b"p", 3)
        delayed.transmit("node-01", "node-02", b"p", 3)

        # assert
        assert plain.trace.to_json_lines() == delayed.trace.to_json_lines()

    def test_unknown_fault_target(self, network: Network):
        with pytest.raises(UnknownTarget):
            network.inject_fault(FaultKind.NODE_OFFLINE, "node-99")

    def test_stale_replay_rule_on_late_delivery(self, network: Network):
        """Test a delay beyond the freshness window makes the receiver discard."""
        # arrange
        circuit = network.onion.select_relays(network.members(), 3, network.rng, "node-01", "node-02")
        network.inject_fault(FaultKind.DELAY, circuit.relays[-1], 40_000)

        # act
        with pytest.raises(TransmitAborted):
            network.transmit("node-01", "node-02", b"payload", 3, circuit=circuit)

        # assert
        assert network.session_report(circuit.session_id).discarded
        assert network.trace.of_kind("discard", circuit.session_id)

    def test_unsigned_onion_is_refused(self, network: Network, mocker):
        """Test the first relay refuses an onion whose signature is not the transmitter's."""
        # arrange
        circuit = network.onion.select_relays(network.members(), 3, network.rng, "node-01", "node-02")
        mocker.patch.object(network.onion, "signed_by", return_value=False)

        # act
        with pytest.raises(TransmitAborted) as info:
            network.transmit("node-01", "node-02", b"payload", 3, circuit=circuit)

        # assert
        assert isinstance(info.value.cause, BadTransmitterSignature)


class TestDisclosureFaults:
    """Test suite for faults during a disclosure."""

    def test_dropped_vote_is_not_counted(self, network: Network):
        # arrange
        receipt = network.transmit("node-01", "node-02", b"payload", 3)
        network.inject_fault(FaultKind.DROP_MESSAGE, "node-09", 1)

        # act
        outcome = network.disclose("node-02", receipt.session_id)

        # assert
        assert network.disclosure.tally(outcome.request_handle).approvals == 9
        assert any(e.actor == "node-09" and e.detail.startswith("vote") for e in network.trace.of_kind("drop"))

    def test_unknown_session(self, network: Network):
        with pytest.raises(EvidenceNotFound):
            network.disclose("node-02", "0" * 16)


class TestTraceExport:
    """Test suite for trace and chain files."""

    def test_export_trace_and_chain(self, network: Network, tmp_path):
        # arrange
        network.transmit("node-01", "node-02", b"payload", 3)

        # act
        trace_path = network.export_trace(tmp_path / "trace.jsonl")
        chain_path = save_chain(network.ledger, tmp_path / "chain.log")

        # assert
        assert len(trace_path.read_text(encoding="utf-8").splitlines()) == len(network.trace)
        assert verify_chain(load_chain(chain_path), miners=network.ledger.miners)
