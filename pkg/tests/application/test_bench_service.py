"""Tests for BenchService class."""
import csv
import io

import pytest

from ygo74.onionchain.application.services.bench_service import BenchService
from ygo74.onionchain.config.settings import ObservabilitySettings, Settings, SimulationSettings
from ygo74.onionchain.domain.models.bench import CSV_COLUMNS, CSV_HEADER


class TestBenchService:
    """Test suite for the timing sweeps."""

    @pytest.fixture
    def service(self) -> BenchService:
        return BenchService(Settings(simulation=SimulationSettings(members=6)), seed=3)

    def test_single_repetition(self, service: BenchService):
        """Test reps=1 gives one transmit and one disclose row with mean = min = max."""
        # act
        records = service.bench_relays([3], reps=1)

        # assert
        assert [record.protocol for record in records] == ["transmit", "disclose"]
        for record in records:
            assert record.reps == 1
            assert record.mean_us == record.min_us == record.max_us
            assert record.mean_us > 0
            assert record.evidence_count == 4

    def test_evidence_scales_with_relays_and_reps(self, service: BenchService):
        """Test each measured repetition commits n + 1 evidence records."""
        # act
        records = service.bench_relays([3, 5], reps=2)

        # assert
        counts = {(record.protocol, record.relays): record.evidence_count for record in records}
        assert counts[("transmit", 3)] == 8
        assert counts[("transmit", 5)] == 12

    def test_warmup_can_be_included(self):
        service = BenchService(Settings(simulation=SimulationSettings(members=6)), seed=3, include_warmup=True)
        records = service.bench_payload([64], relays=3, reps=1)
        assert all(record.reps == 2 for record in records)
        assert all(record.payload_bits == 64 for record in records)

    def test_reps_must_be_positive(self, service: BenchService):
        with pytest.raises(ValueError):
            service.bench_relays([3], reps=0)

    def test_csv_output(self, service: BenchService):
        """Test the CSV has the fixed header and one line per record."""
        # arrange
        records = service.bench_payload([128, 1024], reps=1)

        # act
        text = BenchService.to_csv(records)

        # assert
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + len(records) == 5
        assert lines[1].startswith("transmit,3,128,1,")
        assert text.endswith("\n")

    def test_csv_parses_back(self, service: BenchService):
        """Test a CSV reader recovers the header and every record's fields."""
        # arrange
        records = service.bench_relays([3], reps=1)

        # act
        rows = list(csv.reader(io.StringIO(BenchService.to_csv(records))))

        # assert
        assert tuple(rows[0]) == CSV_COLUMNS
        assert rows[1:] == [record.csv_fields() for record in records]


@pytest.mark.slow
class TestBenchBounds:
    """Test suite checking timing growth and the latency bounds, with a tenfold margin."""

    def test_relay_sweep_grows_and_stays_bounded(self):
        """Test costs grow with the circuit and the three relay transmission stays under 10 x 17.996 ms."""
        # arrange
        service = BenchService(Settings(observability=ObservabilitySettings(metrics_enabled=False)), seed=3)

        # act
        records = service.bench_relays([3, 5, 10], payload_bits=128, reps=10)

        # assert
        means = {(record.protocol, record.relays): record.mean_us for record in records}
        for protocol in ("transmit", "disclose"):
            assert means[(protocol, 3)] < means[(protocol, 10)]
            assert means[(protocol, 5)] >= 0.8 * means[(protocol, 3)]
            assert means[(protocol, 10)] >= 0.8 * means[(protocol, 5)]
        assert means[("transmit", 3)] <= 10 * 17_996
        for relays in (3, 5, 10):
            assert means[("disclose", relays)] <= 1.5 * means[("transmit", relays)]

    def test_thirty_relays_stay_under_two_seconds(self):
        service = BenchService(Settings(observability=ObservabilitySettings(metrics_enabled=False)), seed=3)
        transmit, _ = service.bench_relays([30], reps=3)
        assert transmit.mean_us <= 10 * 200_000
