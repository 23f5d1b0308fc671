"""Identity disclosure: majority vote, backward plea walk and the transmitter's confession."""
import logging
import time
from typing import Callable, Dict, List, Optional, Set, Tuple

from ...config.settings import DisclosureSettings, settings
from ...domain.exceptions.crypto_exceptions import AuthenticationFailure, MalformedEncoding
from ...domain.exceptions.disclosure_exceptions import (
    DisclosureNotApproved,
    EvidenceNotFound,
    KeyDoesNotOpenEvidence,
    KeysDoNotOpenOnion,
    TraceBroken,
)
from ...domain.exceptions.ledger_exceptions import TransactionNotFound
from ...domain.models.crypto import Digest, KeyPair, SymmetricKey
from ...domain.models.disclosure import (
    ConfessionRecord,
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
from ...domain.models.ledger import Transaction, TransactionKind
from ...domain.models.onion import DoubleSignature, Evidence, EvidenceContent, Message, Onion
from ...domain.protocols.plea_provider import PleaProvider
from ...infrastructure.crypto.primitives import digest, sign_with
from ...infrastructure.ledger.ledger import Ledger
from ...infrastructure.ledger.ledger_batch import LedgerBatch
from ...infrastructure.observability.metrics_service import get_metrics_service
from ...infrastructure.retry.commit_waiter import CommitWaiter
from .onion_service import OnionService

logger = logging.getLogger(__name__)

BatchFactory = Callable[[], LedgerBatch]

_REASONS = {
    PleaVerdict.CULPRIT_NO_KEY: CulpritReason.REFUSED_PLEA,
    PleaVerdict.CULPRIT_BAD_SIGNATURE: CulpritReason.FORGED_EVIDENCE,
}


class _RecordedRebuttals:
    """Answers rebuttal demands from a committed transcript."""

    def __init__(self, rebuttals: Dict[str, Optional[Rebuttal]]):
        self._rebuttals = rebuttals

    def release_proof_key(self, party_id: str, evidence_handle: Digest,
                          timeout_blocks: int) -> Optional[SymmetricKey]:
        return None

    def rebut(self, party_id: str, pleader: str, prev_handle: Optional[Digest],
              timeout_blocks: int) -> Optional[Rebuttal]:
        return self._rebuttals.get(pleader)

    def confess(self, party_id: str, evidence_handle: Digest, timeout_blocks: int) -> Optional[List[SymmetricKey]]:
        return None


class DisclosureService:
    """Service running the identity disclosure protocol."""

    def __init__(self, ledger: Ledger,
                 onion_service: Optional[OnionService] = None,
                 disclosure_settings: Optional[DisclosureSettings] = None,
                 batch_factory: Optional[BatchFactory] = None,
                 commit_waiter: Optional[CommitWaiter] = None):
        """Initialize service.

        Args:
            ledger (Ledger): Ledger holding evidence, requests, votes and pleas
            onion_service (Optional[OnionService]): Evidence decoding helpers
            disclosure_settings (Optional[DisclosureSettings]): Voting horizon
            batch_factory (Optional[BatchFactory]): Seals the plea transcript as one block
            commit_waiter (Optional[CommitWaiter]): When given, requests and votes wait for their commit
        """
        self._ledger = ledger
        self._onion = onion_service or OnionService(ledger)
        self._settings = disclosure_settings or settings.disclosure
        self._batch_factory = batch_factory
        self._commit_waiter = commit_waiter
        logger.debug("DisclosureService initialized")

    # ------------------------------------------------------------ request and vote

    def request_disclosure(self, receiver: str, m_fake: Message, terminal_handle: Digest,
                           proof_key: SymmetricKey) -> Transaction:
        """Publish the terminal evidence location and its proof key.

        Args:
            receiver (str): Accusing receiver
            m_fake (Message): Message claimed to be false
            terminal_handle (Digest): Handle of EV_{n+1}
            proof_key (SymmetricKey): Key shared with the last relay

        Returns:
            Transaction: DisclosureRequest transaction

        Raises:
            EvidenceNotFound: terminal_handle is not a committed evidence
            KeyDoesNotOpenEvidence: proof_key does not decrypt it
            NotRegistered: receiver is not a member
        """
        evidence = self._evidence(terminal_handle, EvidenceNotFound)
        try:
            self._onion.open_evidence(evidence, proof_key)
        except (AuthenticationFailure, MalformedEncoding) as exc:
            logger.warning(f"'{receiver}' released a key that does not open {terminal_handle.short()}")
            raise KeyDoesNotOpenEvidence(terminal_handle.hex()) from exc

        request = DisclosureRequest(
            requester=receiver,
            accused_message_digest=digest(m_fake.to_canonical()),
            terminal_evidence_handle=terminal_handle,
            released_proof_key=proof_key,
        )
        tx = self._ledger.submit(TransactionKind.DISCLOSURE_REQUEST, request.to_canonical(), receiver)
        logger.info(f"Disclosure request {tx.handle.short()} by '{receiver}' on {terminal_handle.short()}")
        if self._commit_waiter is not None:
            self._commit_waiter.wait(tx.handle)
        return tx

    def cast_vote(self, voter: str, keypair: KeyPair, request_handle: Digest, approve: bool) -> Transaction:
        """Sign and submit a vote on a disclosure request."""
        vote = Vote(
            voter=voter,
            request_handle=request_handle,
            approve=approve,
            signature=sign_with(keypair, Vote.signed_bytes(request_handle, approve)),
        )
        tx = self._ledger.submit(TransactionKind.DISCLOSURE_VOTE, vote.to_canonical(), voter)
        logger.debug(f"'{voter}' voted {'for' if approve else 'against'} {request_handle.short()}")
        return tx

    def get_request(self, request_handle: Digest) -> DisclosureRequest:
        """Committed disclosure request.

        Raises:
            TransactionNotFound: Unknown handle or not a request
        """
        tx = self._ledger.get_transaction(request_handle)
        if tx.kind != TransactionKind.DISCLOSURE_REQUEST:
            raise TransactionNotFound(request_handle.hex())
        return DisclosureRequest.from_canonical(tx.payload)

    def tally(self, request_handle: Digest) -> TallyResult:
        """Count committed votes within the voting horizon.

        Only members registered at the request height count, each once, and
        only with a signature that verifies under their committed key.

        Returns:
            TallyResult: approved iff approvals > members // 2
        """
        request_height = self._ledger.height_of(request_handle)
        deadline = request_height + self._settings.voting_horizon_blocks
        members = set(self._ledger.members(at_height=request_height))

        voted: Set[str] = set()
        approvals = rejections = 0
        for tx in self._ledger.transactions(TransactionKind.DISCLOSURE_VOTE):
            if self._ledger.height_of(tx.handle) > deadline:
                continue
            try:
                vote = Vote.from_canonical(tx.payload)
            except (MalformedEncoding, ValueError):
                continue
            if vote.request_handle != request_handle or vote.voter not in members or vote.voter in voted:
                continue
            if not self._onion.signed_by(vote.voter, vote.signature, Vote.signed_bytes(request_handle, vote.approve)):
                logger.warning(f"Ignoring vote from '{vote.voter}' with a bad signature")
                continue
            voted.add(vote.voter)
            if vote.approve:
                approvals += 1
            else:
                rejections += 1

        result = TallyResult(request_handle=request_handle, approvals=approvals,
                             rejections=rejections, members=len(members))
        logger.info(f"Disclosure {request_handle.short()}: {approvals}/{len(members)} approvals")
        return result

    # ------------------------------------------------------------ pleas

    def _evidence(self, handle: Optional[Digest], error=TraceBroken) -> Evidence:
        if handle is None or not self._ledger.is_committed(handle):
            raise error(handle.hex() if handle else "none")
        try:
            return self._onion.evidence_at(handle)
        except (TransactionNotFound, MalformedEncoding) as exc:
            raise error(handle.hex()) from exc

    def _open(self, evidence: Evidence, key: SymmetricKey) -> Optional[DoubleSignature]:
        try:
            return self._onion.open_evidence(evidence, key)
        except (AuthenticationFailure, MalformedEncoding):
            return None

    def _packet_of(self, evidence: Evidence, record: DoubleSignature) -> Optional[bytes]:
        """Packet carried by the content; None when the content does not bind the committed predecessor."""
        if evidence.prev_handle is None:
            return record.content
        try:
            content = EvidenceContent.from_canonical(record.content)
        except MalformedEncoding:
            return None
        previous = self._evidence(evidence.prev_handle)
        if content.prev_evidence != previous.ciphertext:
            return None
        return content.packet

    def plea(self, pleader: str, evidence: Evidence, proof_key: Optional[SymmetricKey],
             expected: Optional[bytes] = None,
             plea_provider: Optional[PleaProvider] = None) -> PleaResult:
        """Recompute a plea of innocence from public data and the released key.

        Args:
            pleader (str): Outer signer asked to plead
            evidence (Evidence): Committed evidence under examination
            proof_key (Optional[SymmetricKey]): Released key, None on refusal
            expected (Optional[bytes]): Packet the caller expects the evidence to reveal
            plea_provider (Optional[PleaProvider]): Reaches a blamed predecessor for a rebuttal

        Returns:
            PleaResult: Verdict with everything the plea revealed

        Raises:
            TraceBroken: The evidence back-pointer resolves to nothing
        """
        base = dict(pleading_node=pleader, evidence_handle=evidence.onchain_handle,
                    revealed_key=proof_key, prev_evidence_handle=evidence.prev_handle)

        record = self._open(evidence, proof_key) if proof_key is not None else None
        if record is None:
            logger.info(f"'{pleader}' gave no key opening {evidence.onchain_handle.short()}")
            return PleaResult(**base, verdict=PleaVerdict.CULPRIT_NO_KEY, culprit=pleader)

        base.update(double_signature=record.to_canonical(), previous_node=record.inner_signer)
        if record.outer_signer != pleader or not self._onion.signed_by(
            pleader, record.outer_signature, record.inner_signature.sig_bytes
        ):
            return PleaResult(**base, verdict=PleaVerdict.CULPRIT_BAD_SIGNATURE, culprit=pleader)

        packet = self._packet_of(evidence, record)
        if packet is None:
            logger.info(f"Evidence {evidence.onchain_handle.short()} does not link its predecessor")
            return PleaResult(**base, verdict=PleaVerdict.CULPRIT_BAD_SIGNATURE, culprit=pleader)
        base.update(revealed_packet=packet, matches_expected=None if expected is None else packet == expected)

        if not self._onion.signed_by(record.inner_signer, record.inner_signature, record.content):
            rebuttal = None
            if plea_provider is not None:
                rebuttal = plea_provider.rebut(record.inner_signer, pleader, evidence.prev_handle,
                                               self._settings.plea_timeout_blocks)
            if rebuttal is not None and self.verify_rebuttal(
                rebuttal, record.inner_signer, pleader, evidence.onchain_handle, evidence.prev_handle
            ):
                logger.info(f"'{record.inner_signer}' rebutted the plea of '{pleader}'")
                return PleaResult(**base, verdict=PleaVerdict.CULPRIT_BAD_SIGNATURE, culprit=pleader,
                                  rebuttal=rebuttal)
            return PleaResult(**base, verdict=PleaVerdict.CULPRIT_BAD_SIGNATURE, culprit=record.inner_signer)

        return PleaResult(**base, verdict=PleaVerdict.INNOCENT)

    def verify_rebuttal(self, rebuttal: Rebuttal, previous_node: str, pleader: str,
                        pleaded_handle: Digest, prev_handle: Optional[Digest]) -> bool:
        """A rebuttal is another committed evidence, signed by previous_node then pleader, linking prev_handle."""
        if rebuttal.evidence_handle == pleaded_handle:
            return False
        try:
            evidence = self._evidence(rebuttal.evidence_handle)
        except TraceBroken:
            return False
        if evidence.prev_handle != prev_handle:
            return False
        record = self._open(evidence, rebuttal.proof_key)
        if record is None or record.outer_signer != pleader or record.inner_signer != previous_node:
            return False
        if not self._onion.signed_by(pleader, record.outer_signature, record.inner_signature.sig_bytes):
            return False
        if not self._onion.signed_by(previous_node, record.inner_signature, record.content):
            return False
        try:
            return self._packet_of(evidence, record) is not None
        except TraceBroken:
            return False

    # ------------------------------------------------------------ walk

    def run_disclosure(self, request_handle: Digest, plea_provider: PleaProvider,
                       with_confession: bool = True) -> DisclosureOutcome:
        """Walk the evidence chain backwards from the accused terminal evidence.

        Each pleader is the inner signer named by the previous plea and has
        plea_timeout_blocks blocks to release its proof key; silence counts as
        a refusal. The walk stops at the first culprit verdict, or at EV_1
        where the transmitter stands accused. The pleas, and the confession
        when one is asked for, are committed as one transcript.

        Args:
            request_handle (Digest): Committed disclosure request
            plea_provider (PleaProvider): Reaches the parties named during the walk
            with_confession (bool): Ask the transmitter to confess when the walk ends at it

        Returns:
            DisclosureOutcome: Culprit, transcript and, when run, the confession

        Raises:
            DisclosureNotApproved: No strict majority approved the request
            TraceBroken: An evidence back-pointer resolves to nothing
        """
        tally = self.tally(request_handle)
        if not tally.approved:
            raise DisclosureNotApproved(request_handle.hex(), tally.approvals, tally.members)
        request = self.get_request(request_handle)
        timeout = self._settings.plea_timeout_blocks
        started = time.perf_counter()

        pleas: List[PleaResult] = []
        pleader = request.requester
        key: Optional[SymmetricKey] = request.released_proof_key
        evidence = self._evidence(request.terminal_evidence_handle)
        while True:
            result = self.plea(pleader, evidence, key, plea_provider=plea_provider)
            if not pleas and result.revealed_packet is not None:
                result = result.model_copy(update={
                    "matches_expected": digest(result.revealed_packet) == request.accused_message_digest,
                })
            pleas.append(result)
            metrics = get_metrics_service()
            if metrics:
                metrics.record_plea(result.verdict.value)
            logger.info(f"Plea {len(pleas)} by '{pleader}' on EV{evidence.index}: {result.verdict.value}")

            if result.verdict != PleaVerdict.INNOCENT:
                culprit = Culprit(party_id=result.culprit, reason=_REASONS[result.verdict])
                break
            if evidence.prev_handle is None:
                culprit = Culprit(party_id=result.previous_node, reason=CulpritReason.TRANSMITTER_ORIGIN)
                break
            pleader = result.previous_node
            evidence = self._evidence(evidence.prev_handle)
            key = plea_provider.release_proof_key(pleader, evidence.onchain_handle, timeout)

        outcome = DisclosureOutcome(
            request_handle=request_handle,
            culprit=culprit,
            pleas=pleas,
            recovered_onion=pleas[-1].revealed_packet if culprit.reason == CulpritReason.TRANSMITTER_ORIGIN else None,
        )
        logger.info(f"Disclosure {request_handle.short()}: '{culprit.party_id}' ({culprit.reason.value})")

        record: Optional[ConfessionRecord] = None
        if with_confession and culprit.reason == CulpritReason.TRANSMITTER_ORIGIN:
            hop_keys = plea_provider.confess(culprit.party_id, pleas[-1].evidence_handle, timeout)
            confession = self._confess(culprit.party_id, hop_keys, outcome, request.accused_message_digest)
            outcome = outcome.model_copy(update={"confession": confession})
            record = ConfessionRecord(request_handle=request_handle, transmitter=culprit.party_id,
                                      hop_keys=hop_keys, culprit=confession.culprit,
                                      divergence_index=confession.divergence_index)

        plea_handles, confession_handle = self._commit_transcript(request_handle, request.requester, pleas, record)
        outcome = outcome.model_copy(update={"plea_handles": plea_handles, "confession_handle": confession_handle})
        metrics = get_metrics_service()
        if metrics:
            metrics.record_disclosure(len(pleas) - 1, time.perf_counter() - started, outcome.final_culprit.reason.value)
        return outcome

    def _confess(self, transmitter: str, hop_keys: Optional[List[SymmetricKey]],
                 outcome: DisclosureOutcome, accused_digest: Digest) -> ConfessionResult:
        try:
            return self.confession(transmitter, hop_keys, outcome, accused_digest)
        except KeysDoNotOpenOnion as exc:
            logger.warning(f"Confession of '{transmitter}' rejected: {exc}")
            return ConfessionResult(
                keys_opened_onion=False,
                culprit=Culprit(party_id=transmitter, reason=CulpritReason.TRANSMITTER_ORIGIN),
            )

    def _commit_transcript(self, request_handle: Digest, requester: str, pleas: List[PleaResult],
                           confession: Optional[ConfessionRecord]) -> Tuple[List[Digest], Optional[Digest]]:
        payloads = [(TransactionKind.PLEA, plea.to_canonical(request_handle, step)) for step, plea in enumerate(pleas)]
        if confession is not None:
            payloads.append((TransactionKind.CONFESSION, confession.to_canonical()))
        if self._batch_factory is None:
            handles = [self._ledger.submit(kind, payload, requester).handle for kind, payload in payloads]
        else:
            with self._batch_factory() as batch:
                for kind, payload in payloads:
                    batch.submit(kind, payload, requester)
            handles = [tx.handle for tx in batch.transactions]
        if confession is None:
            return handles, None
        return handles[:-1], handles[-1]

    def verify_transcript(self, request_handle: Digest) -> bool:
        """Re-run every committed plea of a request, then its confession, and compare verdicts."""
        records = []
        for tx in self._ledger.transactions(TransactionKind.PLEA):
            try:
                record = PleaRecord.from_canonical(tx.payload)
            except (MalformedEncoding, ValueError):
                return False
            if record.request_handle == request_handle:
                records.append(record)
        if not records:
            return False

        results: List[PleaResult] = []
        for record in sorted(records, key=lambda r: r.step):
            provider = _RecordedRebuttals({record.pleading_node: record.rebuttal})
            try:
                result = self.plea(record.pleading_node, self._evidence(record.evidence_handle),
                                   record.revealed_key, plea_provider=provider)
            except TraceBroken:
                return False
            if result.verdict != record.verdict or result.culprit != record.culprit:
                logger.warning(f"Plea {record.step} of {request_handle.short()} does not recompute")
                return False
            results.append(result)
        return self._verify_confessions(request_handle, results)

    def _verify_confessions(self, request_handle: Digest, results: List[PleaResult]) -> bool:
        last = results[-1]
        for tx in self._ledger.transactions(TransactionKind.CONFESSION):
            try:
                record = ConfessionRecord.from_canonical(tx.payload)
            except (MalformedEncoding, ValueError):
                logger.warning(f"Skipping malformed confession {tx.handle.short()}")
                continue
            if record.request_handle != request_handle:
                continue
            walked_to_origin = last.verdict == PleaVerdict.INNOCENT and last.prev_evidence_handle is None
            if not walked_to_origin or record.transmitter != last.previous_node:
                logger.warning(f"Confession {tx.handle.short()} does not answer the walk of {request_handle.short()}")
                return False
            outcome = DisclosureOutcome(
                request_handle=request_handle,
                culprit=Culprit(party_id=record.transmitter, reason=CulpritReason.TRANSMITTER_ORIGIN),
                pleas=results,
                recovered_onion=last.revealed_packet,
            )
            accused = self.get_request(request_handle).accused_message_digest
            recomputed = self._confess(record.transmitter, record.hop_keys, outcome, accused)
            if recomputed.culprit != record.culprit or recomputed.divergence_index != record.divergence_index:
                logger.warning(f"Confession {tx.handle.short()} does not recompute")
                return False
        return True

    # ------------------------------------------------------------ confession

    def confession(self, transmitter: str, hop_keys: Optional[List[SymmetricKey]],
                   outcome: DisclosureOutcome, accused_digest: Digest) -> ConfessionResult:
        """Re-peel EV_0 with the transmitter's hop keys and compare each layer with the evidence chain.

        Layer k peeled by relay k must equal the packet relay k forwarded, as
        revealed by EV_{k+2}; the first divergence blames that relay. Without a
        divergence, a recovered message other than the accused one blames the
        accusing receiver.

        Raises:
            KeysDoNotOpenOnion: A key fails to peel its layer, or the keys never reach the message
        """
        accused = Culprit(party_id=transmitter, reason=CulpritReason.TRANSMITTER_ORIGIN)
        if hop_keys is None or outcome.recovered_onion is None:
            logger.info(f"'{transmitter}' did not confess")
            return ConfessionResult(keys_opened_onion=False, culprit=accused)

        forwarded = list(reversed(outcome.pleas))
        current = Onion(ciphertext=outcome.recovered_onion)
        message: Optional[Message] = None
        for layer_index, key in enumerate(hop_keys):
            try:
                layer = self._onion.peel_layer(key, current)
            except (AuthenticationFailure, MalformedEncoding) as exc:
                raise KeysDoNotOpenOnion(layer_index) from exc
            inner = layer.inner.to_canonical() if layer.is_terminal else layer.inner.ciphertext

            if layer_index + 1 < len(forwarded) and forwarded[layer_index + 1].revealed_packet != inner:
                forger = forwarded[layer_index + 1].previous_node
                logger.info(f"Onion layer {layer_index} diverges from the packet forwarded by '{forger}'")
                return ConfessionResult(
                    keys_opened_onion=True,
                    divergence_index=layer_index,
                    culprit=Culprit(party_id=forger, reason=CulpritReason.FORGED_EVIDENCE),
                )
            if layer.is_terminal:
                message = layer.inner
                break
            current = layer.inner

        if message is None:
            raise KeysDoNotOpenOnion(len(hop_keys))
        recovered = message.to_canonical()
        if digest(recovered) != accused_digest:
            requester = outcome.pleas[0].pleading_node
            logger.info(f"Recovered message differs from the accusation of '{requester}'")
            return ConfessionResult(
                recovered_message=recovered,
                keys_opened_onion=True,
                culprit=Culprit(party_id=requester, reason=CulpritReason.CALUMNIATING_RECEIVER),
            )
        return ConfessionResult(recovered_message=recovered, keys_opened_onion=True, culprit=accused)
