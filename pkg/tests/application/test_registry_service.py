"""Tests for RegistryService class."""
import pytest

from ygo74.onionchain.application.services.registry_service import RegistryService
from ygo74.onionchain.config.settings import RegistrySettings
from ygo74.onionchain.domain.exceptions import NotTheKeyHolder
from ygo74.onionchain.domain.models.crypto import Signature
from ygo74.onionchain.domain.models.ledger import TransactionKind
from ygo74.onionchain.domain.models.registry import Identity, RejectionReason
from ygo74.onionchain.infrastructure.crypto.primitives import generate_keypair, verify
from ygo74.onionchain.infrastructure.ledger.ledger import Ledger


class TestRegistryService:
    """Test suite for RegistryService."""

    @pytest.fixture
    def service(self, ledger: Ledger) -> RegistryService:
        return RegistryService(ledger, RegistrySettings())

    @pytest.fixture
    def newcomer(self):
        return generate_keypair(seed="test:heidi", scheme="ed25519")

    def test_request_signs_identity(self, newcomer):
        """Test the request carries a signature over the canonical identity."""
        # act
        request = RegistryService.build_registration_request(Identity(id_string="heidi"), newcomer)

        # assert
        assert request.public_key == newcomer.public_key
        assert verify(newcomer.public_key, request.signature, Identity(id_string="heidi").to_canonical())

    def test_accepted_registration_is_pending_until_sealed(self, service: RegistryService, ledger: Ledger,
                                                          keypairs: dict, newcomer):
        """Test acceptance yields a pending handle that commits with the next block."""
        # arrange
        request = RegistryService.build_registration_request(Identity(id_string="heidi"), newcomer)

        # act
        decision = service.validate_registration(request)

        # assert
        assert decision.accepted
        assert service.lookup_public_key("heidi") is None
        ledger.commit_pending("alice", keypairs["alice"])
        assert service.public_key_of("heidi") == newcomer.public_key
        assert service.lookup_public_key(newcomer.public_key).handle == decision.handle

    def test_identity_outside_allowlist(self, ledger: Ledger, newcomer):
        # arrange
        service = RegistryService(ledger, RegistrySettings(identity_allowlist=["ivan"]))
        request = RegistryService.build_registration_request(Identity(id_string="heidi"), newcomer)

        # act
        decision = service.validate_registration(request)

        # assert
        assert not decision.accepted
        assert decision.reason == RejectionReason.IDENTITY_NOT_ALLOWED
        assert ledger.pending == []

    def test_bad_signature(self, service: RegistryService, newcomer):
        request = RegistryService.build_registration_request(Identity(id_string="heidi"), newcomer)
        forged = request.model_copy(update={"signature": Signature(sig_bytes=b"\x01" * 64)})
        assert service.validate_registration(forged).reason == RejectionReason.BAD_SIGNATURE

    def test_registered_key_is_rejected(self, service: RegistryService, keypairs: dict):
        """Test a second identity cannot claim a committed key."""
        # arrange
        request = RegistryService.build_registration_request(Identity(id_string="heidi"), keypairs["bob"])

        # act
        decision = service.validate_registration(request)

        # assert
        assert decision.reason == RejectionReason.DUPLICATE_KEY

    def test_confliction_by_holder(self, service: RegistryService, keypairs: dict):
        tx = service.raise_confliction("carol", keypairs["carol"].public_key)
        assert tx.kind == TransactionKind.CONFLICTION

    def test_confliction_by_non_holder(self, service: RegistryService, keypairs: dict):
        """Test only the committed holder of a key can contest it."""
        with pytest.raises(NotTheKeyHolder):
            service.raise_confliction("dave", keypairs["carol"].public_key)
