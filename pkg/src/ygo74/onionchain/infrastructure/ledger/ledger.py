"""Permissioned append-only ledger with a round-robin single sequencer."""
import logging
import threading
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from ...domain.exceptions.crypto_exceptions import MalformedEncoding
from ...domain.exceptions.ledger_exceptions import (
    DuplicateHandle,
    EmptyPending,
    NotMiner,
    NotRegistered,
    TransactionNotFound,
)
from ...domain.models.crypto import Digest, KeyPair
from ...domain.models.disclosure import Vote
from ...domain.models.ledger import Block, BlockHeader, Transaction, TransactionKind
from ...domain.models.registry import Confliction, RegistrationRecord, RegistrationRequest
from ..crypto.primitives import digest, sign_with, verify
from ..observability.metrics_service import get_metrics_service
from .merkle import MerkleProof, merkle_proof, merkle_root

logger = logging.getLogger(__name__)

GENESIS_HEADER = BlockHeader(prev_hash=Digest.zero(), merkle_root=Digest.zero(), height=0, timestamp=0)


def make_transaction(kind: TransactionKind, payload: bytes, submitter: str) -> Transaction:
    """Build a transaction and compute its handle.

    Args:
        kind (TransactionKind): Record kind
        payload (bytes): Canonical payload
        submitter (str): Submitting party id

    Returns:
        Transaction: Transaction whose handle is the digest of its canonical bytes
    """
    handle = digest(Transaction.canonical_body(kind, payload, submitter))
    return Transaction(kind=kind, payload=payload, submitter=submitter, handle=handle)


def header_digest(header: BlockHeader) -> Digest:
    return digest(header.to_canonical())


def genesis_block() -> Block:
    return Block(header=GENESIS_HEADER, body=[])


class Ledger:
    """Replicated log collapsed to one linearizable state machine.

    Attributes:
        miners (List[str]): Parties allowed to seal blocks
    """

    def __init__(self, miners: Optional[Sequence[str]] = None, clock: Optional[Callable[[], int]] = None):
        """Initialize a ledger holding only the genesis block.

        Args:
            miners (Optional[Sequence[str]]): Configured miner set
            clock (Optional[Callable[[], int]]): Millisecond clock stamped into headers
        """
        self.miners: List[str] = list(miners or [])
        self._clock = clock or (lambda: 0)
        self._lock = threading.RLock()
        self._chain: List[Block] = [genesis_block()]
        self._pending: List[Transaction] = []
        self._positions: Dict[Digest, Tuple[int, int]] = {}
        self._seen: Set[Digest] = set()
        self._rejected: Dict[Digest, str] = {}
        self._by_party: Dict[str, RegistrationRecord] = {}
        self._by_key: Dict[bytes, RegistrationRecord] = {}
        self._members: List[str] = []
        self._votes: Set[Tuple[str, Digest]] = set()

    # ------------------------------------------------------------------ writes

    def submit_transaction(self, tx: Transaction) -> Digest:
        """Enqueue a transaction.

        Args:
            tx (Transaction): Transaction built with make_transaction

        Returns:
            Digest: Handle, not yet committed

        Raises:
            NotRegistered: Non-member submitting anything but a registration
            DuplicateHandle: Same transaction submitted before
        """
        with self._lock:
            if tx.kind != TransactionKind.REGISTRATION and tx.submitter not in self._by_party:
                logger.warning(f"Rejected {tx.kind.value} from non-member '{tx.submitter}'")
                raise NotRegistered(tx.submitter)
            if tx.handle in self._seen:
                raise DuplicateHandle(tx.handle.hex())
            self._seen.add(tx.handle)
            self._pending.append(tx)
            logger.debug(f"Pending {tx.kind.value} {tx.handle.short()} from '{tx.submitter}'")

        metrics = get_metrics_service()
        if metrics:
            metrics.record_transaction(tx.kind.value, "submitted")
        return tx.handle

    def submit(self, kind: TransactionKind, payload: bytes, submitter: str) -> Transaction:
        """Build and enqueue a transaction."""
        tx = make_transaction(kind, payload, submitter)
        self.submit_transaction(tx)
        return tx

    def withdraw(self, handles: Sequence[Digest]) -> None:
        """Remove still-pending transactions; committed ones are untouched."""
        with self._lock:
            dropped = set(handles)
            self._pending = [tx for tx in self._pending if tx.handle not in dropped]
            self._seen -= {h for h in dropped if h not in self._positions}

    def commit_pending(self, sequencer: str, sealing_key: KeyPair) -> Block:
        """Seal every admissible pending transaction into a new block.

        Conflictions go first. Registrations reusing a committed or contested key
        and repeated votes are dropped and reported by rejected_reason().

        Args:
            sequencer (str): Miner sealing the block
            sealing_key (KeyPair): Sequencer's registered signing key

        Returns:
            Block: The appended block

        Raises:
            NotMiner: Sequencer outside the miner set or key not its registered one
            EmptyPending: Nothing pending, or nothing admissible
        """
        with self._lock:
            if sequencer not in self.miners:
                raise NotMiner(sequencer)
            if not self._pending:
                raise EmptyPending("No pending transactions")

            ordered = sorted(self._pending, key=lambda tx: tx.priority)
            admitted, rejected, registrations, votes = self._admit(ordered)

            sequencer_record = self._by_party.get(sequencer) or next(
                (r for r in registrations if r.party_id == sequencer), None
            )
            if sequencer_record is None or sequencer_record.public_key != sealing_key.public_key:
                raise NotMiner(sequencer)

            self._pending = []
            for handle, reason in rejected.items():
                self._rejected[handle] = reason
                logger.warning(f"Dropped transaction {handle.short()} at commit: {reason}")
            if not admitted:
                raise EmptyPending("All pending transactions were rejected")

            previous = self._chain[-1].header
            header = BlockHeader(
                prev_hash=header_digest(previous),
                merkle_root=merkle_root([tx.handle for tx in admitted]),
                height=previous.height + 1,
                timestamp=self._clock(),
                sequencer=sequencer,
            )
            header = header.model_copy(update={"signature": sign_with(sealing_key, header.unsigned_bytes())})
            block = Block(header=header, body=admitted)
            self._chain.append(block)

            for position, tx in enumerate(admitted):
                self._positions[tx.handle] = (header.height, position)
            for record in registrations:
                record = record.model_copy(update={"height": header.height})
                if record.party_id in self._by_party:
                    logger.warning(f"Identity '{record.party_id}' registered a second key; the first stays in use")
                else:
                    self._by_party[record.party_id] = record
                    self._members.append(record.party_id)
                self._by_key[record.public_key] = record
            self._votes |= votes

        logger.info(f"Block {header.height} sealed by '{sequencer}' with {len(admitted)} transactions")
        metrics = get_metrics_service()
        if metrics:
            metrics.record_block(len(admitted))
            for tx in admitted:
                metrics.record_transaction(tx.kind.value, "committed")
        return block

    def _admit(self, ordered: List[Transaction]):
        admitted: List[Transaction] = []
        rejected: Dict[Digest, str] = {}
        registrations: List[RegistrationRecord] = []
        votes: Set[Tuple[str, Digest]] = set()
        taken: Set[bytes] = set(self._by_key)
        contested: Set[bytes] = set()

        for tx in ordered:
            try:
                if tx.kind == TransactionKind.CONFLICTION:
                    claim = Confliction.from_canonical(tx.payload)
                    holder = self._by_party.get(claim.claimant)
                    if claim.claimant != tx.submitter or holder is None or holder.public_key != claim.disputed_key:
                        rejected[tx.handle] = "NotTheKeyHolder"
                        continue
                    contested.add(claim.disputed_key)

                elif tx.kind == TransactionKind.REGISTRATION:
                    request = RegistrationRequest.from_canonical(tx.payload)
                    if request.identity.id_string != tx.submitter:
                        rejected[tx.handle] = "SubmitterMismatch"
                        continue
                    if not verify(request.public_key, request.signature, request.identity.to_canonical()):
                        rejected[tx.handle] = "BadSignature"
                        continue
                    if request.public_key in taken or request.public_key in contested:
                        rejected[tx.handle] = "DuplicateKey"
                        continue
                    taken.add(request.public_key)
                    registrations.append(RegistrationRecord(
                        party_id=tx.submitter, public_key=request.public_key, handle=tx.handle, height=0,
                    ))

                elif tx.kind == TransactionKind.DISCLOSURE_VOTE:
                    vote = Vote.from_canonical(tx.payload)
                    ballot = (vote.voter, vote.request_handle)
                    if vote.voter != tx.submitter:
                        rejected[tx.handle] = "SubmitterMismatch"
                        continue
                    if ballot in self._votes or ballot in votes:
                        rejected[tx.handle] = "DuplicateVote"
                        continue
                    votes.add(ballot)

            except (MalformedEncoding, ValueError) as exc:
                rejected[tx.handle] = f"Malformed: {exc}"
                continue
            admitted.append(tx)

        return admitted, rejected, registrations, votes

    # ------------------------------------------------------------------ reads

    def is_committed(self, handle: Digest) -> bool:
        with self._lock:
            return handle in self._positions

    def get_transaction(self, handle: Digest) -> Transaction:
        """Committed transaction by handle.

        Raises:
            TransactionNotFound: Unknown or still pending handle
        """
        with self._lock:
            position = self._positions.get(handle)
            if position is None:
                raise TransactionNotFound(handle.hex())
            height, index = position
            return self._chain[height].body[index]

    def height_of(self, handle: Digest) -> int:
        with self._lock:
            position = self._positions.get(handle)
            if position is None:
                raise TransactionNotFound(handle.hex())
            return position[0]

    def rejected_reason(self, handle: Digest) -> Optional[str]:
        with self._lock:
            return self._rejected.get(handle)

    def merkle_proof(self, handle: Digest) -> Tuple[MerkleProof, Digest]:
        """Membership proof of a committed transaction and the root it verifies against."""
        with self._lock:
            height, index = self._positions.get(handle) or (None, None)
            if height is None:
                raise TransactionNotFound(handle.hex())
            block = self._chain[height]
            return merkle_proof([tx.handle for tx in block.body], index), block.header.merkle_root

    @property
    def blocks(self) -> List[Block]:
        with self._lock:
            return list(self._chain)

    @property
    def height(self) -> int:
        with self._lock:
            return len(self._chain) - 1

    @property
    def pending(self) -> List[Transaction]:
        with self._lock:
            return list(self._pending)

    def transactions(self, kind: Optional[TransactionKind] = None) -> Iterator[Transaction]:
        """Committed transactions in chain order."""
        for block in self.blocks:
            for tx in block.body:
                if kind is None or tx.kind == kind:
                    yield tx

    # ------------------------------------------------------------ membership

    def is_member(self, party_id: str) -> bool:
        with self._lock:
            return party_id in self._by_party

    def registration_of(self, party_id: str) -> Optional[RegistrationRecord]:
        with self._lock:
            return self._by_party.get(party_id)

    def registration_for_key(self, public_key: bytes) -> Optional[RegistrationRecord]:
        with self._lock:
            return self._by_key.get(public_key)

    def members(self, at_height: Optional[int] = None) -> List[str]:
        """Registered party ids, optionally as of a given height."""
        with self._lock:
            if at_height is None:
                return list(self._members)
            return [p for p in self._members if self._by_party[p].height <= at_height]


def verify_chain(chain: Union[Ledger, Sequence[Block]], miners: Optional[Sequence[str]] = None) -> bool:
    """Check genesis, heights, back links, handles, Merkle roots and sequencer signatures.

    Args:
        chain (Union[Ledger, Sequence[Block]]): Ledger or loaded blocks
        miners (Optional[Sequence[str]]): Miner set to enforce, the ledger's own when given a Ledger

    Returns:
        bool: True iff the chain is untouched
    """
    if isinstance(chain, Ledger):
        miners = chain.miners if miners is None else miners
        blocks = chain.blocks
    else:
        blocks = list(chain)

    if not blocks or blocks[0] != genesis_block():
        logger.warning("Chain does not start with the genesis block")
        return False

    keys: Dict[str, bytes] = {}
    seen: Set[Digest] = set()
    for height in range(1, len(blocks)):
        block = blocks[height]
        header = block.header
        if header.height != height or header.prev_hash != header_digest(blocks[height - 1].header):
            logger.warning(f"Block {height}: broken back link or height")
            return False
        if not block.body:
            logger.warning(f"Block {height}: empty body")
            return False
        for tx in block.body:
            if digest(tx.to_canonical()) != tx.handle or tx.handle in seen:
                logger.warning(f"Block {height}: transaction {tx.handle.short()} does not match its handle")
                return False
            seen.add(tx.handle)
        if merkle_root([tx.handle for tx in block.body]) != header.merkle_root:
            logger.warning(f"Block {height}: Merkle root mismatch")
            return False
        for tx in block.body:
            if tx.kind == TransactionKind.REGISTRATION:
                try:
                    request = RegistrationRequest.from_canonical(tx.payload)
                except (MalformedEncoding, ValueError):
                    return False
                keys.setdefault(request.identity.id_string, request.public_key)
        if miners is not None and header.sequencer not in miners:
            logger.warning(f"Block {height}: sequencer '{header.sequencer}' is not a miner")
            return False
        sequencer_key = keys.get(header.sequencer)
        if sequencer_key is None or header.signature is None or not verify(
            sequencer_key, header.signature, header.unsigned_bytes()
        ):
            logger.warning(f"Block {height}: sequencer signature does not verify")
            return False
    return True
