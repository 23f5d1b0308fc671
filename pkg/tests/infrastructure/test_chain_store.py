"""Tests for the line-oriented chain file."""
import pytest

from ygo74.onionchain.domain.exceptions import ChainFileError
from ygo74.onionchain.domain.models.ledger import TransactionKind
from ygo74.onionchain.infrastructure.ledger.chain_store import dump_chain, load_chain, parse_chain, save_chain
from ygo74.onionchain.infrastructure.ledger.ledger import Ledger, verify_chain


class TestChainStore:
    """Test suite for saving, loading and rejecting chain files."""

    @pytest.fixture
    def chain(self, ledger: Ledger, keypairs: dict) -> Ledger:
        ledger.submit(TransactionKind.EVIDENCE, b"ev", "bob")
        ledger.commit_pending("alice", keypairs["alice"])
        return ledger

    def test_saved_chain_loads_identically(self, chain: Ledger, tmp_path):
        """Test a written chain file reads back block for block and still verifies."""
        # act
        path = save_chain(chain, tmp_path / "state" / "chain.log")
        blocks = load_chain(path)

        # assert
        assert blocks == chain.blocks
        assert verify_chain(blocks)

    def test_file_layout(self, chain: Ledger):
        """Test one H line per block followed by its T lines."""
        lines = dump_chain(chain.blocks).splitlines()
        assert [line[0] for line in lines].count("H") == chain.height + 1
        assert lines[0].startswith("H ")
        assert lines[1].startswith("H ")

    def test_edited_file_fails_verification(self, chain: Ledger, tmp_path):
        """Test a hand edit that still parses is caught by verify_chain."""
        # arrange
        path = save_chain(chain, tmp_path / "chain.log")
        lines = path.read_text(encoding="utf-8").splitlines()
        lines = lines[:-1]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        # act & assert
        assert not verify_chain(load_chain(path))

    @pytest.mark.parametrize("text", [
        "X 00\n",
        "H zz\n",
        "T 00\n",
        "",
        "H 0102\n",
    ])
    def test_malformed_files(self, text: str):
        with pytest.raises(ChainFileError):
            parse_chain(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ChainFileError):
            load_chain(tmp_path / "absent.log")
