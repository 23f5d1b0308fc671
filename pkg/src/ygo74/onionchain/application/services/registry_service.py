"""Registration protocol: request construction, validation, confliction and lookup."""
import logging
from typing import Optional, Union

from ...config.settings import RegistrySettings, settings
from ...domain.exceptions.registry_exceptions import NotTheKeyHolder
from ...domain.models.crypto import KeyPair
from ...domain.models.ledger import Transaction, TransactionKind
from ...domain.models.registry import (
    Confliction,
    Identity,
    RegistrationDecision,
    RegistrationRecord,
    RegistrationRequest,
    RejectionReason,
)
from ...infrastructure.crypto.primitives import sign_with, verify
from ...infrastructure.ledger.ledger import Ledger
from ...infrastructure.ledger.ledger_batch import LedgerBatch

logger = logging.getLogger(__name__)


class RegistryService:
    """Service for registering parties on the permissioned ledger."""

    def __init__(self, ledger: Ledger, registry_settings: Optional[RegistrySettings] = None):
        """Initialize service.

        Args:
            ledger (Ledger): Ledger holding registrations
            registry_settings (Optional[RegistrySettings]): Allowlist configuration
        """
        self._ledger = ledger
        self._settings = registry_settings or settings.registry
        logger.debug("RegistryService initialized")

    @staticmethod
    def build_registration_request(identity: Identity, keypair: KeyPair) -> RegistrationRequest:
        """Sign the identity with the party's secret key.

        Args:
            identity (Identity): Identity to claim
            keypair (KeyPair): Party's signing key pair

        Returns:
            RegistrationRequest: Public key, identity and signature over canonical(identity)
        """
        signature = sign_with(keypair, identity.to_canonical())
        return RegistrationRequest(public_key=keypair.public_key, identity=identity, signature=signature)

    def validate_registration(self, request: RegistrationRequest,
                              batch: Optional[LedgerBatch] = None) -> RegistrationDecision:
        """Check a request against committed state and submit it when valid.

        Args:
            request (RegistrationRequest): Incoming request
            batch (Optional[LedgerBatch]): Batch to submit through, the ledger directly otherwise

        Returns:
            RegistrationDecision: accept with the pending handle, or reject with a reason
        """
        identity = request.identity.id_string
        allowlist = self._settings.identity_allowlist
        if allowlist is not None and identity not in allowlist:
            logger.warning(f"Identity '{identity}' is not on the allowlist")
            return RegistrationDecision.reject(RejectionReason.IDENTITY_NOT_ALLOWED)

        if not verify(request.public_key, request.signature, request.identity.to_canonical()):
            logger.warning(f"Registration of '{identity}' carries a bad signature")
            return RegistrationDecision.reject(RejectionReason.BAD_SIGNATURE)

        if self._ledger.registration_for_key(request.public_key) is not None:
            logger.warning(f"Registration of '{identity}' reuses a registered public key")
            return RegistrationDecision.reject(RejectionReason.DUPLICATE_KEY)

        if self._ledger.registration_of(identity) is not None:
            logger.warning(f"Identity '{identity}' is already registered under another key")

        submit = batch.submit if batch is not None else self._ledger.submit
        tx = submit(TransactionKind.REGISTRATION, request.to_canonical(), identity)
        logger.info(f"Registration of '{identity}' accepted as {tx.handle.short()}")
        return RegistrationDecision.accept(tx.handle)

    def raise_confliction(self, claimant: str, disputed_key: bytes) -> Transaction:
        """Contest another party's attempt to register the claimant's key.

        Args:
            claimant (str): Holder of the key
            disputed_key (bytes): Key under registration

        Returns:
            Transaction: Pending confliction, sealed ahead of other pending kinds

        Raises:
            NotTheKeyHolder: Claimant's committed key differs from disputed_key
        """
        record = self._ledger.registration_of(claimant)
        if record is None or record.public_key != disputed_key:
            logger.error(f"'{claimant}' raised a confliction on a key it does not hold")
            raise NotTheKeyHolder(claimant)
        confliction = Confliction(claimant=claimant, disputed_key=disputed_key)
        tx = self._ledger.submit(TransactionKind.CONFLICTION, confliction.to_canonical(), claimant)
        logger.info(f"Confliction {tx.handle.short()} raised by '{claimant}'")
        return tx

    def lookup_public_key(self, party_or_key: Union[str, bytes]) -> Optional[RegistrationRecord]:
        """Committed registration by party id or by public key; None when absent or still pending."""
        if isinstance(party_or_key, bytes):
            return self._ledger.registration_for_key(party_or_key)
        return self._ledger.registration_of(party_or_key)

    def public_key_of(self, party_id: str) -> Optional[bytes]:
        record = self._ledger.registration_of(party_id)
        return record.public_key if record else None
