"""Registration, transmission and disclosure commands."""
import logging
from typing import Any, Dict, Optional

from knack.arguments import ArgumentsContext
from knack.commands import CLICommand, CLICommandsLoader, CommandGroup

from ....domain.models.disclosure import CulpritReason, DisclosureOutcome
from ..core.utils import get_workspace, set_exit_code

logger = logging.getLogger(__name__)

REASON_EXIT_CODES = {
    CulpritReason.TRANSMITTER_ORIGIN: 0,
    CulpritReason.REFUSED_PLEA: 10,
    CulpritReason.FORGED_EVIDENCE: 11,
    CulpritReason.CALUMNIATING_RECEIVER: 12,
}


def register(cmd: CLICommand, party_id: str, seed: Optional[int] = None, members: Optional[int] = None,
             state_dir: Optional[str] = None) -> Dict[str, Any]:
    """Join a party to the workspace network and print its committed registration."""
    workspace = get_workspace(cmd, state_dir)
    workspace.ensure(members=members, seed=seed)
    handle = workspace.run({"verb": "register", "id": party_id})
    ledger = workspace.network().ledger
    return {"id": party_id, "handle": handle.hex(), "height": ledger.height_of(handle)}


def send(cmd: CLICommand, transmitter: str, receiver: str, relays: int = 3, payload_bits: int = 128,
         text: Optional[str] = None, state_dir: Optional[str] = None) -> Dict[str, Any]:
    """Transmit a message and print the receipt's evidence handles."""
    workspace = get_workspace(cmd, state_dir)
    payload = text.encode("utf-8") if text is not None else workspace.payload(payload_bits)
    receipt = workspace.run({
        "verb": "send", "from": transmitter, "to": receiver, "relays": relays, "payload": payload.hex(),
    })
    return {
        "session": receipt.session_id,
        "transmitter": receipt.transmitter,
        "receiver": receipt.receiver,
        "relays": receipt.relays,
        "evidence": [handle.hex() for handle in receipt.evidence_handles],
        "delivered_digest": receipt.delivered_digest.hex(),
    }


def disclose(cmd: CLICommand, receiver: str, evidence: str, state_dir: Optional[str] = None) -> Dict[str, Any]:
    """Accuse the message delivered with the given terminal evidence and print the verdict."""
    workspace = get_workspace(cmd, state_dir)
    session = workspace.session_of(receiver, evidence)
    outcome: DisclosureOutcome = workspace.run({"verb": "disclose", "receiver": receiver, "session": session})
    culprit = outcome.final_culprit
    set_exit_code(cmd, REASON_EXIT_CODES[culprit.reason])
    return describe_outcome(outcome)


def describe_outcome(outcome: DisclosureOutcome) -> Dict[str, Any]:
    culprit = outcome.final_culprit
    confession = outcome.confession
    return {
        "culprit": culprit.party_id,
        "reason": culprit.reason.value,
        "request": outcome.request_handle.hex(),
        "pleas": [
            {
                "step": step,
                "pleader": plea.pleading_node,
                "evidence": plea.evidence_handle.hex(),
                "verdict": plea.verdict.value,
                "culprit": plea.culprit,
                "rebutted": plea.rebutted,
            }
            for step, plea in enumerate(outcome.pleas)
        ],
        "transcript": [handle.hex() for handle in outcome.plea_handles],
        "confession": None if confession is None else {
            "keys_opened_onion": confession.keys_opened_onion,
            "divergence_index": confession.divergence_index,
            "culprit": confession.culprit.party_id,
        },
    }


class ProtocolCommandsLoader:
    """Command loader for register, send and disclose."""

    def load_command_table(self, command_loader: CLICommandsLoader):
        with CommandGroup(command_loader, '', 'ygo74.onionchain.interfaces.cli.commands.protocol#{}') as g:
            g.command('register', 'register')
            g.command('send', 'send')
            g.command('disclose', 'disclose')
        return {}

    def load_arguments(self, command_loader: CLICommandsLoader, command):
        for verb in ('register', 'send', 'disclose'):
            with ArgumentsContext(command_loader, verb) as arg_context:
                arg_context.argument('state_dir', type=str, help='Workspace directory (default: ONIONCHAIN_STATE_DIR)')

        with ArgumentsContext(command_loader, 'register') as arg_context:
            arg_context.argument('party_id', options_list=['--id'], type=str, help='Identity string to register')
            arg_context.argument('seed', type=int, help='Seed of a new workspace')
            arg_context.argument('members', type=int, help='Initial members of a new workspace')

        with ArgumentsContext(command_loader, 'send') as arg_context:
            arg_context.argument('transmitter', options_list=['--from'], type=str, help='Sending party')
            arg_context.argument('receiver', options_list=['--to'], type=str, help='Receiving party')
            arg_context.argument('relays', type=int, help='Number of relays')
            arg_context.argument('payload_bits', type=int, help='Size of the random payload')
            arg_context.argument('text', type=str, help='Send this text instead of a random payload')

        with ArgumentsContext(command_loader, 'disclose') as arg_context:
            arg_context.argument('receiver', type=str, help='Accusing receiver')
            arg_context.argument('evidence', type=str, help='Terminal evidence handle, or a prefix of it')
