"""Domain models."""

from .crypto import Digest, KeyPair, KeyPurpose, Signature, SymmetricKey
from .ledger import Block, BlockHeader, Transaction, TransactionKind
from .registry import (
    Confliction,
    Identity,
    RegistrationDecision,
    RegistrationRecord,
    RegistrationRequest,
    RejectionReason,
)
from .onion import (
    Circuit,
    DoubleSignature,
    Evidence,
    EvidenceContent,
    Message,
    Onion,
    PeeledLayer,
    RoutingDirective,
    SessionReport,
    TransmitReceipt,
)
from .disclosure import (
    ConfessionResult,
    Culprit,
    CulpritReason,
    DisclosureOutcome,
    DisclosureRequest,
    PleaRecord,
    PleaResult,
    PleaVerdict,
    Rebuttal,
    TallyResult,
    Vote,
)
from .simnet import (
    AdversaryKind,
    AdversaryScript,
    Envelope,
    FaultKind,
    MessengerVariant,
    ScenarioOutcome,
    Trace,
    TraceEvent,
    ViewEntry,
)
from .bench import CSV_COLUMNS, CSV_HEADER, BenchRecord

__all__ = [
    'Digest', 'KeyPair', 'KeyPurpose', 'Signature', 'SymmetricKey',
    'Block', 'BlockHeader', 'Transaction', 'TransactionKind',
    'Confliction', 'Identity', 'RegistrationDecision', 'RegistrationRecord', 'RegistrationRequest',
    'RejectionReason',
    'Circuit', 'DoubleSignature', 'Evidence', 'EvidenceContent', 'Message', 'Onion', 'PeeledLayer',
    'RoutingDirective', 'SessionReport', 'TransmitReceipt',
    'ConfessionResult', 'Culprit', 'CulpritReason', 'DisclosureOutcome', 'DisclosureRequest',
    'PleaRecord', 'PleaResult', 'PleaVerdict', 'Rebuttal', 'TallyResult', 'Vote',
    'AdversaryKind', 'AdversaryScript', 'Envelope', 'FaultKind', 'MessengerVariant', 'ScenarioOutcome',
    'Trace', 'TraceEvent', 'ViewEntry',
    'CSV_COLUMNS', 'CSV_HEADER', 'BenchRecord',
]
