"""Tests for the permissioned ledger."""
import pytest

from ygo74.onionchain.application.services.registry_service import RegistryService
from ygo74.onionchain.domain.exceptions import (
    DuplicateHandle,
    EmptyPending,
    NotMiner,
    NotRegistered,
    TransactionNotFound,
)
from ygo74.onionchain.domain.models.crypto import Digest, Signature
from ygo74.onionchain.domain.models.disclosure import Vote
from ygo74.onionchain.domain.models.ledger import Block, TransactionKind
from ygo74.onionchain.domain.models.registry import Confliction, Identity, RegistrationRequest
from ygo74.onionchain.infrastructure.crypto.primitives import digest, generate_keypair, sign_with
from ygo74.onionchain.infrastructure.ledger.ledger import Ledger, genesis_block, verify_chain
from ygo74.onionchain.infrastructure.ledger.merkle import merkle_proof, merkle_root, verify_merkle_proof


def _vote(voter_keys, voter: str, request: Digest, approve: bool = True) -> bytes:
    signature = sign_with(voter_keys, Vote.signed_bytes(request, approve))
    return Vote(voter=voter, request_handle=request, approve=approve, signature=signature).to_canonical()


class TestLedgerWrites:
    """Test suite for submission and block sealing."""

    def test_genesis_only_at_start(self):
        ledger = Ledger(miners=["alice"])
        assert ledger.height == 0
        assert ledger.blocks == [genesis_block()]
        assert ledger.members() == []

    def test_registration_commits_members(self, ledger: Ledger, keypairs: dict):
        """Test the fixture block registers everyone at height 1."""
        assert ledger.height == 1
        assert sorted(ledger.members()) == sorted(keypairs)
        assert ledger.registration_of("bob").public_key == keypairs["bob"].public_key
        assert ledger.registration_for_key(keypairs["carol"].public_key).party_id == "carol"

    def test_non_member_cannot_submit(self, ledger: Ledger):
        with pytest.raises(NotRegistered):
            ledger.submit(TransactionKind.EVIDENCE, b"x", "mallory")

    def test_duplicate_submission(self, ledger: Ledger):
        """Test resubmitting identical bytes raises DuplicateHandle."""
        # arrange
        ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")

        # act & assert
        with pytest.raises(DuplicateHandle):
            ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")

    def test_handle_is_not_committed_until_sealed(self, ledger: Ledger, keypairs: dict):
        """Test a pending transaction becomes readable only after commit_pending."""
        # arrange
        tx = ledger.submit(TransactionKind.EVIDENCE, b"payload", "bob")

        # act
        pending_committed = ledger.is_committed(tx.handle)
        block = ledger.commit_pending("alice", keypairs["alice"])

        # assert
        assert not pending_committed
        assert ledger.is_committed(tx.handle)
        assert ledger.get_transaction(tx.handle) == tx
        assert ledger.height_of(tx.handle) == block.header.height == 2
        assert ledger.pending == []

    def test_unknown_handle(self, ledger: Ledger):
        with pytest.raises(TransactionNotFound):
            ledger.get_transaction(Digest.zero())

    def test_only_miners_seal(self, ledger: Ledger, keypairs: dict):
        """Test a non-miner, or a miner with the wrong key, cannot seal."""
        # arrange
        ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")

        # act & assert
        with pytest.raises(NotMiner):
            ledger.commit_pending("bob", keypairs["bob"])
        with pytest.raises(NotMiner):
            ledger.commit_pending("alice", keypairs["bob"])

    def test_nothing_to_seal(self, ledger: Ledger, keypairs: dict):
        with pytest.raises(EmptyPending):
            ledger.commit_pending("alice", keypairs["alice"])

    def test_withdraw_removes_pending(self, ledger: Ledger):
        tx = ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")
        ledger.withdraw([tx.handle])
        assert ledger.pending == []
        ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")

    def test_transactions_filtered_by_kind(self, ledger: Ledger, keypairs: dict):
        ledger.submit(TransactionKind.EVIDENCE, b"a", "bob")
        ledger.submit(TransactionKind.EVIDENCE, b"b", "carol")
        ledger.commit_pending("alice", keypairs["alice"])
        assert len(list(ledger.transactions(TransactionKind.EVIDENCE))) == 2
        assert len(list(ledger.transactions(TransactionKind.REGISTRATION))) == len(keypairs)


class TestLedgerAdmission:
    """Test suite for transactions dropped when a block is sealed."""

    def test_duplicate_key_is_dropped(self, ledger: Ledger, keypairs: dict):
        """Test registering bob's key under another identity is dropped at commit."""
        # arrange
        mallory = Identity(id_string="mallory")
        forged = RegistrationRequest(
            public_key=keypairs["bob"].public_key,
            identity=mallory,
            signature=sign_with(keypairs["bob"], mallory.to_canonical()),
        )
        bad = ledger.submit(TransactionKind.REGISTRATION, forged.to_canonical(), "mallory")
        ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")

        # act
        ledger.commit_pending("alice", keypairs["alice"])

        # assert
        assert not ledger.is_committed(bad.handle)
        assert ledger.rejected_reason(bad.handle) == "DuplicateKey"
        assert not ledger.is_member("mallory")

    def test_bad_signature_and_submitter_mismatch(self, ledger: Ledger, keypairs: dict):
        # arrange
        mallory = generate_keypair(seed="mallory", scheme="ed25519")
        request = RegistryService.build_registration_request(Identity(id_string="mallory"), mallory)
        unsigned = request.model_copy(update={"signature": Signature(sig_bytes=b"\x00" * 64)})
        bad_sig = ledger.submit(TransactionKind.REGISTRATION, unsigned.to_canonical(), "mallory")
        mismatch = ledger.submit(TransactionKind.REGISTRATION, request.to_canonical(), "trent")
        ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")

        # act
        ledger.commit_pending("alice", keypairs["alice"])

        # assert
        assert ledger.rejected_reason(bad_sig.handle) == "BadSignature"
        assert ledger.rejected_reason(mismatch.handle) == "SubmitterMismatch"

    def test_confliction_blocks_key_in_same_batch(self, ledger: Ledger, keypairs: dict):
        """Test a confliction sealed with the contested registration drops it."""
        # arrange
        mallory = Identity(id_string="mallory")
        forged = RegistrationRequest(
            public_key=keypairs["carol"].public_key,
            identity=mallory,
            signature=sign_with(keypairs["carol"], mallory.to_canonical()),
        )
        registration = ledger.submit(TransactionKind.REGISTRATION, forged.to_canonical(), "mallory")
        claim = Confliction(claimant="carol", disputed_key=keypairs["carol"].public_key)
        confliction = ledger.submit(TransactionKind.CONFLICTION, claim.to_canonical(), "carol")

        # act
        block = ledger.commit_pending("alice", keypairs["alice"])

        # assert
        assert block.body[0].handle == confliction.handle
        assert not ledger.is_committed(registration.handle)

    def test_false_confliction_is_dropped(self, ledger: Ledger, keypairs: dict):
        claim = Confliction(claimant="dave", disputed_key=keypairs["carol"].public_key)
        tx = ledger.submit(TransactionKind.CONFLICTION, claim.to_canonical(), "dave")
        ledger.submit(TransactionKind.EVIDENCE, b"x", "bob")
        ledger.commit_pending("alice", keypairs["alice"])
        assert ledger.rejected_reason(tx.handle) == "NotTheKeyHolder"

    def test_second_vote_is_dropped(self, ledger: Ledger, keypairs: dict):
        """Test one vote per voter and request survives, across blocks too."""
        # arrange
        request = ledger.registration_of("alice").handle
        first = ledger.submit(TransactionKind.DISCLOSURE_VOTE, _vote(keypairs["bob"], "bob", request), "bob")
        ledger.commit_pending("alice", keypairs["alice"])
        again = ledger.submit(TransactionKind.DISCLOSURE_VOTE,
                              _vote(keypairs["bob"], "bob", request, approve=False), "bob")

        # act & assert
        with pytest.raises(EmptyPending):
            ledger.commit_pending("alice", keypairs["alice"])
        assert ledger.is_committed(first.handle)
        assert ledger.rejected_reason(again.handle) == "DuplicateVote"

    def test_second_key_for_identity_keeps_first(self, ledger: Ledger, keypairs: dict):
        # arrange
        other = generate_keypair(seed="bob-2", scheme="ed25519")
        request = RegistryService.build_registration_request(Identity(id_string="bob"), other)
        ledger.submit(TransactionKind.REGISTRATION, request.to_canonical(), "bob")

        # act
        ledger.commit_pending("alice", keypairs["alice"])

        # assert
        assert ledger.registration_of("bob").public_key == keypairs["bob"].public_key
        assert ledger.members().count("bob") == 1


class TestChainVerification:
    """Test suite for verify_chain and Merkle proofs."""

    @pytest.fixture
    def chain(self, ledger: Ledger, keypairs: dict) -> Ledger:
        for round_ in range(3):
            for party in ("bob", "carol", "dave"):
                ledger.submit(TransactionKind.EVIDENCE, f"{party}:{round_}".encode(), party)
            ledger.commit_pending("alice", keypairs["alice"])
        return ledger

    def test_untouched_chain_verifies(self, chain: Ledger):
        assert verify_chain(chain)
        assert verify_chain(chain.blocks, miners=["alice"])

    def test_foreign_miner_set_fails(self, chain: Ledger):
        assert not verify_chain(chain.blocks, miners=["bob"])

    def test_tampered_payload_fails(self, chain: Ledger):
        """Test changing one payload byte breaks the chain."""
        # arrange
        blocks = list(chain.blocks)
        block = blocks[2]
        tx = block.body[0].model_copy(update={"payload": b"tampered"})
        blocks[2] = Block(header=block.header, body=[tx, *block.body[1:]])

        # act & assert
        assert not verify_chain(blocks)

    def test_removed_block_fails(self, chain: Ledger):
        blocks = list(chain.blocks)
        del blocks[2]
        assert not verify_chain(blocks)

    def test_reordered_body_fails(self, chain: Ledger):
        blocks = list(chain.blocks)
        block = blocks[3]
        blocks[3] = Block(header=block.header, body=list(reversed(block.body)))
        assert not verify_chain(blocks)

    @pytest.mark.slow
    def test_every_single_byte_mutation_fails(self, chain: Ledger):
        """Test flipping any payload byte of any transaction is detected."""
        for height in range(1, chain.height + 1):
            for index, tx in enumerate(chain.blocks[height].body):
                for offset in range(len(tx.payload)):
                    # arrange
                    payload = bytearray(tx.payload)
                    payload[offset] ^= 0xFF
                    blocks = list(chain.blocks)
                    body = list(blocks[height].body)
                    body[index] = tx.model_copy(update={"payload": bytes(payload)})
                    blocks[height] = Block(header=blocks[height].header, body=body)

                    # act & assert
                    assert not verify_chain(blocks), f"block {height} tx {index} byte {offset}"

    def test_ledger_merkle_proof(self, chain: Ledger):
        """Test an inclusion proof from the ledger verifies against the header root."""
        # arrange
        tx = chain.blocks[3].body[1]

        # act
        proof, root = chain.merkle_proof(tx.handle)

        # assert
        assert root == chain.blocks[3].header.merkle_root
        assert verify_merkle_proof(tx.handle, proof, root)
        assert not verify_merkle_proof(chain.blocks[3].body[0].handle, proof, root)


class TestMerkle:
    """Test suite for the Merkle tree helpers."""

    @pytest.mark.parametrize("count", [1, 2, 3, 5, 8])
    def test_every_leaf_proves(self, count: int):
        leaves = [Digest(hash_bytes=bytes([i + 1]) * 32) for i in range(count)]
        root = merkle_root(leaves)
        for index, leaf in enumerate(leaves):
            assert verify_merkle_proof(leaf, merkle_proof(leaves, index), root)

    def test_empty_root_is_zero(self):
        assert merkle_root([]) == Digest.zero()

    def test_parent_hashes_concatenated_children(self):
        """Test a two leaf root and a three leaf root follow the pairing rule."""
        # arrange
        a, b, c = (Digest(hash_bytes=bytes([i]) * 32) for i in (1, 2, 3))
        ab = digest(a.hash_bytes + b.hash_bytes)
        cc = digest(c.hash_bytes + c.hash_bytes)

        # act & assert
        assert merkle_root([a, b]) == ab
        assert merkle_root([a, b, c]) == digest(ab.hash_bytes + cc.hash_bytes)

    def test_proof_index_out_of_range(self):
        with pytest.raises(IndexError):
            merkle_proof([Digest.zero()], 1)
