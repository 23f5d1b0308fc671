"""Global test configuration and fixtures."""
import logging
import sys
from pathlib import Path
from typing import Callable

import pytest

# Add src directory to Python path for imports
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from ygo74.onionchain.application.services.registry_service import RegistryService  # noqa: E402
from ygo74.onionchain.config.settings import Settings  # noqa: E402
from ygo74.onionchain.domain.models.registry import Identity  # noqa: E402
from ygo74.onionchain.infrastructure.crypto.primitives import generate_keypair  # noqa: E402
from ygo74.onionchain.infrastructure.ledger.ledger import Ledger  # noqa: E402
from ygo74.onionchain.infrastructure.ledger.ledger_batch import LedgerBatch  # noqa: E402
from ygo74.onionchain.simulation.network import Network, spawn_network  # noqa: E402

MEMBERS = ["alice", "bob", "carol", "dave", "erin", "frank", "grace"]


@pytest.fixture(autouse=True)
def quiet_libraries():
    """Reduce noise from the simulator trace during tests."""
    logging.getLogger("ygo74.onionchain.simulation").setLevel(logging.WARNING)
    yield


@pytest.fixture
def app_settings() -> Settings:
    """Default protocol settings, independent of the environment."""
    return Settings()


@pytest.fixture
def keypairs() -> dict:
    """Deterministic Ed25519 key pairs for the fixture members."""
    return {party: generate_keypair(seed=f"test:{party}", scheme="ed25519") for party in MEMBERS}


@pytest.fixture
def register() -> Callable[[Ledger, dict], None]:
    """Register parties on a ledger in one block sealed by the first miner."""
    def _register(ledger: Ledger, keys: dict) -> None:
        registry = RegistryService(ledger)
        sequencer = ledger.miners[0]
        with LedgerBatch(ledger, sequencer, keys[sequencer]) as batch:
            for party, keypair in keys.items():
                request = RegistryService.build_registration_request(Identity(id_string=party), keypair)
                assert registry.validate_registration(request, batch=batch).accepted
    return _register


@pytest.fixture
def ledger(keypairs: dict, register) -> Ledger:
    """Ledger with every fixture member registered, alice mining."""
    chain = Ledger(miners=["alice"])
    register(chain, keypairs)
    return chain


@pytest.fixture
def network(app_settings: Settings) -> Network:
    """Ten-node simulated network, seed 7."""
    return spawn_network(members=10, seed=7, app_settings=app_settings)

