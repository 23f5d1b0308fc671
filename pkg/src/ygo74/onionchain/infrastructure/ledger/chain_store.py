"""Line-delimited chain file: `H <hex header>` / `T <hex transaction>`, genesis first."""
import logging
from pathlib import Path
from typing import List, Union

from ...domain.codec import Tag, decode_text, expect_fields
from ...domain.exceptions.crypto_exceptions import MalformedEncoding
from ...domain.exceptions.ledger_exceptions import ChainFileError
from ...domain.models.ledger import Block, BlockHeader, Transaction, TransactionKind
from .ledger import Ledger, make_transaction

logger = logging.getLogger(__name__)


def transaction_from_canonical(data: bytes) -> Transaction:
    """Decode canonical transaction bytes; the handle is recomputed."""
    kind, payload, submitter = expect_fields(data, [Tag.KIND, Tag.PAYLOAD, Tag.SUBMITTER])
    try:
        tx_kind = TransactionKind(decode_text(kind))
    except ValueError as exc:
        raise MalformedEncoding(f"Unknown transaction kind: {exc}") from exc
    return make_transaction(tx_kind, payload, decode_text(submitter))


def dump_chain(blocks: List[Block]) -> str:
    lines: List[str] = []
    for block in blocks:
        lines.append(f"H {block.header.to_canonical().hex()}")
        lines.extend(f"T {tx.to_canonical().hex()}" for tx in block.body)
    return "\n".join(lines) + "\n"


def save_chain(chain: Union[Ledger, List[Block]], path: Union[str, Path]) -> Path:
    """Write the chain file.

    Args:
        chain (Union[Ledger, List[Block]]): Ledger or blocks to write
        path (Union[str, Path]): Target file

    Returns:
        Path: Written file
    """
    blocks = chain.blocks if isinstance(chain, Ledger) else chain
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dump_chain(blocks), encoding="utf-8")
    logger.debug(f"Saved {len(blocks)} blocks to {target}")
    return target


def parse_chain(text: str) -> List[Block]:
    """Parse chain file content.

    Raises:
        ChainFileError: Unknown record type, bad hex, malformed record or a transaction before any header
    """
    blocks: List[Block] = []
    header: BlockHeader = None
    body: List[Transaction] = []
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        record, _, value = line.partition(" ")
        try:
            raw = bytes.fromhex(value.strip())
            if record == "H":
                if header is not None:
                    blocks.append(Block(header=header, body=body))
                header, body = BlockHeader.from_canonical(raw), []
            elif record == "T":
                if header is None:
                    raise ChainFileError(f"Line {number}: transaction before the first header")
                body.append(transaction_from_canonical(raw))
            else:
                raise ChainFileError(f"Line {number}: unknown record type '{record}'")
        except (MalformedEncoding, ValueError) as exc:
            raise ChainFileError(f"Line {number}: {exc}") from exc
    if header is not None:
        blocks.append(Block(header=header, body=body))
    if not blocks:
        raise ChainFileError("Chain file holds no blocks")
    return blocks


def load_chain(path: Union[str, Path]) -> List[Block]:
    """Read blocks from a chain file.

    Raises:
        ChainFileError: Missing or malformed file
    """
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ChainFileError(f"Cannot read chain file {source}: {exc}") from exc
    return parse_chain(text)
