"""Protocol metrics on the OpenTelemetry API (no-op until an SDK provider is installed)."""
import logging
from contextlib import contextmanager
from typing import Optional

from opentelemetry import metrics

logger = logging.getLogger(__name__)


class ProtocolMetrics:
    """Counters and histograms for ledger and protocol activity."""

    def __init__(self, service_name: str = "onionchain"):
        """Initialize metrics service.

        Args:
            service_name: Name of the meter
        """
        self.service_name = service_name
        self.meter = metrics.get_meter(service_name)
        self._initialize_metrics()

    def _initialize_metrics(self) -> None:
        # Ledger
        self.transactions_total = self.meter.create_counter(
            name="ledger_transactions_total",
            description="Ledger transactions by kind and stage",
            unit="1"
        )
        self.blocks_total = self.meter.create_counter(
            name="ledger_blocks_total",
            description="Sealed blocks",
            unit="1"
        )
        self.block_size = self.meter.create_histogram(
            name="ledger_block_transactions",
            description="Transactions per sealed block",
            unit="1"
        )

        # Protocols
        self.sessions_in_progress = self.meter.create_up_down_counter(
            name="onion_sessions_in_progress",
            description="Transmissions currently running",
            unit="1"
        )
        self.transmit_duration = self.meter.create_histogram(
            name="onion_transmit_duration_seconds",
            description="Message transmitting duration",
            unit="s"
        )
        self.disclosure_duration = self.meter.create_histogram(
            name="disclosure_duration_seconds",
            description="Identity disclosure duration",
            unit="s"
        )
        self.pleas_total = self.meter.create_counter(
            name="disclosure_pleas_total",
            description="Pleas by verdict",
            unit="1"
        )
        self.scenarios_total = self.meter.create_counter(
            name="simnet_scenarios_total",
            description="Simulated scenarios by kind and outcome",
            unit="1"
        )

        logger.info("Protocol metrics initialized")

    def record_transaction(self, kind: str, stage: str) -> None:
        self.transactions_total.add(1, {"kind": kind, "stage": stage})

    def record_block(self, size: int) -> None:
        self.blocks_total.add(1)
        self.block_size.record(size)

    @contextmanager
    def track_session_in_progress(self, relays: int):
        """Context manager to track transmissions in progress."""
        attributes = {"relays": str(relays)}
        self.sessions_in_progress.add(1, attributes)
        try:
            yield
        finally:
            self.sessions_in_progress.add(-1, attributes)

    def record_transmit(self, relays: int, duration: float, success: bool) -> None:
        self.transmit_duration.record(duration, {"relays": str(relays), "success": str(success).lower()})

    def record_disclosure(self, relays: int, duration: float, reason: str) -> None:
        self.disclosure_duration.record(duration, {"relays": str(relays), "reason": reason})

    def record_plea(self, verdict: str) -> None:
        self.pleas_total.add(1, {"verdict": verdict})

    def record_scenario(self, kind: str, defeated: bool) -> None:
        self.scenarios_total.add(1, {"kind": kind, "defeated": str(defeated).lower()})


# Global metrics service instance
_metrics_service: Optional[ProtocolMetrics] = None


def get_metrics_service() -> Optional[ProtocolMetrics]:
    """Get the global metrics service instance.

    Returns:
        ProtocolMetrics instance or None if not initialized
    """
    return _metrics_service


def initialize_metrics_service(service_name: str = "onionchain") -> ProtocolMetrics:
    """Initialize global metrics service.

    Args:
        service_name: Name of the service

    Returns:
        Initialized ProtocolMetrics instance
    """
    global _metrics_service
    _metrics_service = ProtocolMetrics(service_name)
    return _metrics_service
