"""Timing sweeps over relay count and payload size."""
import csv
import io
import logging
import random
import time
from typing import Iterable, List, Optional, Tuple

from ...config.settings import Settings, settings as default_settings
from ...domain.models.bench import CSV_COLUMNS, BenchRecord
from ...domain.models.onion import Message
from ...infrastructure.crypto.primitives import random_bytes

logger = logging.getLogger(__name__)


def _elapsed_us(started_ns: int) -> float:
    return (time.perf_counter_ns() - started_ns) / 1000.0


class BenchService:
    """Service measuring transmission and disclosure cost on the simulator.

    One network is spawned per sweep point; spawning, relay choice and vote
    collection are setup and stay outside the timed sections.
    """

    def __init__(self, app_settings: Optional[Settings] = None, seed: Optional[int] = None,
                 include_warmup: bool = False):
        """Initialize service.

        Args:
            app_settings (Optional[Settings]): Settings passed to every spawned network
            seed (Optional[int]): Network seed, configured seed by default
            include_warmup (bool): Keep the cold first iteration in the statistics
        """
        self._settings = app_settings or default_settings
        self._seed = self._settings.simulation.seed if seed is None else seed
        self._include_warmup = include_warmup
        logger.debug("BenchService initialized")

    def bench_relays(self, relay_counts: Iterable[int], payload_bits: int = 128,
                     reps: int = 30) -> List[BenchRecord]:
        """Transmit and disclose rows for each relay count."""
        records: List[BenchRecord] = []
        for relays in relay_counts:
            records.extend(self._measure(relays, payload_bits, reps))
        return records

    def bench_payload(self, sizes_bits: Iterable[int], relays: int = 3, reps: int = 30) -> List[BenchRecord]:
        """Transmit and disclose rows for each payload size."""
        records: List[BenchRecord] = []
        for payload_bits in sizes_bits:
            records.extend(self._measure(relays, payload_bits, reps))
        return records

    def _measure(self, relays: int, payload_bits: int, reps: int) -> Tuple[BenchRecord, BenchRecord]:
        # deferred: the simulator depends on the application services
        from ...simulation.network import spawn_network

        if reps < 1:
            raise ValueError("reps must be at least 1")
        members = max(self._settings.simulation.members, relays + 2)
        network = spawn_network(members=members, seed=self._seed, app_settings=self._settings)
        rng = random.Random(f"bench/{self._seed}/{relays}/{payload_bits}")
        transmitter, receiver = rng.sample(network.members(), 2)
        payload = random_bytes((payload_bits + 7) // 8, rng)

        transmit_us: List[float] = []
        disclose_us: List[float] = []
        evidence = 0
        for iteration in range(reps + 1):
            message = Message(payload=payload, timestamp=network.now())
            started = time.perf_counter_ns()
            receipt = network.transmit(transmitter, receiver, message, relays)
            transmitted = _elapsed_us(started)

            node = network.nodes[receiver]
            terminal = node.evidence[receipt.session_id].onchain_handle
            started = time.perf_counter_ns()
            request = network.disclosure.request_disclosure(receiver, node.accusation(receipt.session_id),
                                                            terminal, node.proof_keys[terminal])
            disclosed = _elapsed_us(started)
            network.collect_votes(request.handle)
            started = time.perf_counter_ns()
            network.disclosure.run_disclosure(request.handle, network, with_confession=False)
            disclosed += _elapsed_us(started)

            if iteration == 0 and not self._include_warmup:
                continue
            transmit_us.append(transmitted)
            disclose_us.append(disclosed)
            evidence += len(receipt.evidence_handles)

        rows = (
            BenchRecord.from_samples("transmit", relays, payload_bits, transmit_us, evidence),
            BenchRecord.from_samples("disclose", relays, payload_bits, disclose_us, evidence),
        )
        for row in rows:
            logger.info(f"bench {row.to_csv_row()}")
        return rows

    @staticmethod
    def to_csv(records: Iterable[BenchRecord]) -> str:
        """CSV text with the fixed header."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(record.csv_fields() for record in records)
        return buffer.getvalue()
