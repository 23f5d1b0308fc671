"""Domain exception hierarchy."""
from .domain_exception import DomainException
from .crypto_exceptions import AuthenticationFailure, CryptoError, MalformedEncoding, PeerUnreachable
from .ledger_exceptions import (
    ChainFileError,
    CommitTimeout,
    DuplicateHandle,
    EmptyPending,
    LedgerError,
    NotMiner,
    NotRegistered,
    TransactionNotFound,
)
from .registry_exceptions import NotTheKeyHolder, RegistrationRejected, RegistryError
from .onion_exceptions import (
    BadPrevSignature,
    BadTransmitterSignature,
    InsufficientNodes,
    MessageDropped,
    NTooSmall,
    OnionError,
    PrevEvidenceNotCommitted,
    StaleMessage,
    TransmitAborted,
)
from .disclosure_exceptions import (
    DisclosureError,
    DisclosureNotApproved,
    EvidenceNotFound,
    KeyDoesNotOpenEvidence,
    KeysDoNotOpenOnion,
    TraceBroken,
)
from .simulation_exceptions import SimulationError, TooFewMembers, UnknownTarget, WorkspaceError

__all__ = [
    "DomainException",
    "CryptoError", "AuthenticationFailure", "MalformedEncoding", "PeerUnreachable",
    "LedgerError", "NotRegistered", "DuplicateHandle", "NotMiner", "EmptyPending",
    "TransactionNotFound", "ChainFileError", "CommitTimeout",
    "RegistryError", "NotTheKeyHolder", "RegistrationRejected",
    "OnionError", "InsufficientNodes", "NTooSmall", "BadTransmitterSignature", "BadPrevSignature",
    "PrevEvidenceNotCommitted", "StaleMessage", "MessageDropped", "TransmitAborted",
    "DisclosureError", "EvidenceNotFound", "KeyDoesNotOpenEvidence", "DisclosureNotApproved",
    "TraceBroken", "KeysDoNotOpenOnion",
    "SimulationError", "TooFewMembers", "UnknownTarget", "WorkspaceError",
]
