"""Chain file commands."""
import logging
from typing import Any, Dict

from knack.arguments import ArgumentsContext
from knack.commands import CLICommand, CLICommandsLoader, CommandGroup

from ....domain.exceptions import ChainFileError
from ....infrastructure.ledger.chain_store import load_chain
from ....infrastructure.ledger.ledger import verify_chain
from ..core.utils import set_exit_code

logger = logging.getLogger(__name__)


def verify_ledger(cmd: CLICommand, file: str) -> Dict[str, Any]:
    """Check a chain file; exit code 1 when it is broken or unreadable."""
    try:
        blocks = load_chain(file)
    except ChainFileError as exc:
        logger.error(str(exc))
        set_exit_code(cmd, 1)
        return {"file": file, "valid": False, "blocks": 0, "error": str(exc)}

    valid = verify_chain(blocks)
    set_exit_code(cmd, 0 if valid else 1)
    return {"file": file, "valid": valid, "blocks": len(blocks)}


class LedgerCommandsLoader:
    """Command loader for ledger commands."""

    def load_command_table(self, command_loader: CLICommandsLoader):
        with CommandGroup(command_loader, 'ledger', 'ygo74.onionchain.interfaces.cli.commands.ledger#{}') as g:
            g.command('verify', 'verify_ledger')
        return {}

    def load_arguments(self, command_loader: CLICommandsLoader, command):
        with ArgumentsContext(command_loader, 'ledger verify') as arg_context:
            arg_context.positional('file', type=str, help='Chain file to verify')
