"""Configuration settings for the Onionchain library, simulator and CLI."""
import os
import logging
from typing import List, Literal, Optional
from pydantic import BaseModel, Field, field_validator

logger = logging.getLogger(__name__)


def _env_list(name: str) -> Optional[List[str]]:
    """Read a comma separated environment variable.

    Args:
        name (str): Environment variable name

    Returns:
        Optional[List[str]]: Stripped non-empty items, None when unset
    """
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return None
    return [item.strip() for item in raw.split(",") if item.strip()]


class CryptoSettings(BaseModel):
    """Cryptographic parameters."""

    signature_scheme: Literal["ed25519", "ecdsa-p256"] = "ed25519"
    symmetric_key_bits: int = 128

    @field_validator("symmetric_key_bits")
    @classmethod
    def validate_key_bits(cls, v):
        if v not in (128, 192, 256):
            raise ValueError("symmetric_key_bits must be 128, 192 or 256")
        return v

    @property
    def symmetric_key_bytes(self) -> int:
        return self.symmetric_key_bits // 8

    @classmethod
    def from_env(cls) -> "CryptoSettings":
        """Create CryptoSettings instance from environment variables."""
        return cls(
            signature_scheme=os.getenv("ONIONCHAIN_SIGNATURE_SCHEME", "ed25519"),
            symmetric_key_bits=int(os.getenv("ONIONCHAIN_SYMMETRIC_KEY_BITS", "128")),
        )


class LedgerSettings(BaseModel):
    """Permissioned ledger settings."""

    # Empty means "the first spawned node is the only miner"
    miners: List[str] = Field(default_factory=list)
    commit_poll_attempts: int = Field(default=3, ge=1)
    # simulated time between two sequencer turns
    block_interval_ms: int = Field(default=1000, ge=1)

    @classmethod
    def from_env(cls) -> "LedgerSettings":
        """Create LedgerSettings instance from environment variables."""
        return cls(
            miners=_env_list("ONIONCHAIN_MINERS") or [],
            commit_poll_attempts=int(os.getenv("ONIONCHAIN_COMMIT_POLL_ATTEMPTS", "3")),
            block_interval_ms=int(os.getenv("ONIONCHAIN_BLOCK_INTERVAL_MS", "1000")),
        )


class OnionSettings(BaseModel):
    """Message transmitting protocol settings."""

    min_relays: int = Field(default=3, ge=3)
    freshness_window_ms: int = Field(default=30_000, ge=0)
    clock_skew_ms: int = Field(default=5_000, ge=0)

    @classmethod
    def from_env(cls) -> "OnionSettings":
        """Create OnionSettings instance from environment variables."""
        return cls(
            min_relays=int(os.getenv("ONIONCHAIN_MIN_RELAYS", "3")),
            freshness_window_ms=int(os.getenv("ONIONCHAIN_FRESHNESS_WINDOW_MS", "30000")),
            clock_skew_ms=int(os.getenv("ONIONCHAIN_CLOCK_SKEW_MS", "5000")),
        )


class RegistrySettings(BaseModel):
    """Registration protocol settings."""

    # None disables the identity allowlist
    identity_allowlist: Optional[List[str]] = None

    @classmethod
    def from_env(cls) -> "RegistrySettings":
        """Create RegistrySettings instance from environment variables."""
        return cls(identity_allowlist=_env_list("ONIONCHAIN_IDENTITY_ALLOWLIST"))


class DisclosureSettings(BaseModel):
    """Identity disclosure settings."""

    voting_horizon_blocks: int = Field(default=3, ge=1)
    plea_timeout_blocks: int = Field(default=3, ge=1)

    @classmethod
    def from_env(cls) -> "DisclosureSettings":
        """Create DisclosureSettings instance from environment variables."""
        return cls(
            voting_horizon_blocks=int(os.getenv("ONIONCHAIN_VOTING_HORIZON_BLOCKS", "3")),
            plea_timeout_blocks=int(os.getenv("ONIONCHAIN_PLEA_TIMEOUT_BLOCKS", "3")),
        )


class SimulationSettings(BaseModel):
    """Simulated network defaults."""

    members: int = Field(default=10, ge=5)
    miners: int = Field(default=1, ge=1)
    seed: int = 1
    state_dir: str = ".onionchain"

    @classmethod
    def from_env(cls) -> "SimulationSettings":
        """Create SimulationSettings instance from environment variables."""
        return cls(
            members=int(os.getenv("ONIONCHAIN_MEMBERS", "10")),
            miners=int(os.getenv("ONIONCHAIN_MINER_COUNT", "1")),
            seed=int(os.getenv("ONIONCHAIN_SEED", "1")),
            state_dir=os.getenv("ONIONCHAIN_STATE_DIR", ".onionchain"),
        )


class ObservabilitySettings(BaseModel):
    """Logging, trace echo and metrics settings."""

    log_level: str = "INFO"
    # ONIONCHAIN_LOG: off | info | debug
    trace_level: Literal["off", "info", "debug"] = "off"
    metrics_enabled: bool = True

    @classmethod
    def from_env(cls) -> "ObservabilitySettings":
        """Create ObservabilitySettings instance from environment variables."""
        settings = cls(
            log_level=os.getenv("LOG_LEVEL", "INFO").upper(),
            trace_level=os.getenv("ONIONCHAIN_LOG", "off").lower(),
            metrics_enabled=os.getenv("ONIONCHAIN_METRICS_ENABLED", "true").lower() == "true",
        )
        logger.debug(f"Created ObservabilitySettings: log_level={settings.log_level}, trace_level={settings.trace_level}")
        return settings


class Settings(BaseModel):
    """Main application settings."""

    crypto: CryptoSettings = Field(default_factory=CryptoSettings)
    ledger: LedgerSettings = Field(default_factory=LedgerSettings)
    onion: OnionSettings = Field(default_factory=OnionSettings)
    registry: RegistrySettings = Field(default_factory=RegistrySettings)
    disclosure: DisclosureSettings = Field(default_factory=DisclosureSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    observability: ObservabilitySettings = Field(default_factory=ObservabilitySettings)

    @classmethod
    def from_env(cls) -> "Settings":
        """Create Settings instance from environment variables."""
        return cls(
            crypto=CryptoSettings.from_env(),
            ledger=LedgerSettings.from_env(),
            onion=OnionSettings.from_env(),
            registry=RegistrySettings.from_env(),
            disclosure=DisclosureSettings.from_env(),
            simulation=SimulationSettings.from_env(),
            observability=ObservabilitySettings.from_env(),
        )


# Global settings instance
settings = Settings.from_env()
