"""Permissioned ledger."""
from .chain_store import load_chain, parse_chain, save_chain
from .ledger import GENESIS_HEADER, Ledger, header_digest, make_transaction, verify_chain
from .ledger_batch import LedgerBatch
from .merkle import merkle_proof, merkle_root, verify_merkle_proof

__all__ = [
    "load_chain", "parse_chain", "save_chain",
    "GENESIS_HEADER", "Ledger", "header_digest", "make_transaction", "verify_chain",
    "LedgerBatch",
    "merkle_proof", "merkle_root", "verify_merkle_proof",
]
