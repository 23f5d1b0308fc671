"""Attack scenario commands, one per adversary kind."""
import logging
from typing import Any, Dict, Optional

from knack.arguments import ArgumentsContext
from knack.commands import CLICommand, CLICommandsLoader, CommandGroup

from ....domain.models.simnet import AdversaryKind, AdversaryScript, MessengerVariant
from ....simulation.network import spawn_network
from ....simulation.scenarios import run_scenario
from ..core.utils import get_settings, set_exit_code
from .protocol import describe_outcome

logger = logging.getLogger(__name__)


def _attack(cmd: CLICommand, kind: AdversaryKind, nodes: int, relays: int, seed: Optional[int],
            trace_out: Optional[str], variant: MessengerVariant = MessengerVariant.FORGE) -> Dict[str, Any]:
    network = spawn_network(members=nodes, seed=seed, app_settings=get_settings(cmd))
    _, outcome = run_scenario(network, AdversaryScript(kind=kind, variant=variant), n_relays=relays)
    if trace_out:
        network.export_trace(trace_out)
    set_exit_code(cmd, 0 if outcome.defeated else 1)
    return {
        "kind": kind.value,
        "seed": network.seed,
        "defeated": outcome.defeated,
        "delivered": outcome.delivered,
        "discarded": outcome.discarded,
        "culprit": outcome.culprit.party_id if outcome.culprit else None,
        "expected_culprits": sorted(outcome.expected_culprits),
        "evidence_count": outcome.evidence_count,
        "errors": outcome.errors,
        "disclosure": describe_outcome(outcome.disclosure) if outcome.disclosure else None,
    }


def attack_honest(cmd: CLICommand, nodes: int = 10, relays: int = 3, seed: Optional[int] = None,
                  trace_out: Optional[str] = None) -> Dict[str, Any]:
    """Honest session followed by a disclosure."""
    return _attack(cmd, AdversaryKind.HONEST, nodes, relays, seed, trace_out)


def attack_malicious_transmitter(cmd: CLICommand, nodes: int = 10, relays: int = 3, seed: Optional[int] = None,
                                 trace_out: Optional[str] = None) -> Dict[str, Any]:
    return _attack(cmd, AdversaryKind.MALICIOUS_TRANSMITTER, nodes, relays, seed, trace_out)


def attack_malicious_messenger(cmd: CLICommand, nodes: int = 10, relays: int = 3, seed: Optional[int] = None,
                               trace_out: Optional[str] = None, variant: str = "forge") -> Dict[str, Any]:
    return _attack(cmd, AdversaryKind.MALICIOUS_MESSENGER, nodes, relays, seed, trace_out, MessengerVariant(variant))


def attack_replay(cmd: CLICommand, nodes: int = 10, relays: int = 3, seed: Optional[int] = None,
                  trace_out: Optional[str] = None) -> Dict[str, Any]:
    return _attack(cmd, AdversaryKind.REPLAY, nodes, relays, seed, trace_out)


def attack_calumniating(cmd: CLICommand, nodes: int = 10, relays: int = 3, seed: Optional[int] = None,
                        trace_out: Optional[str] = None) -> Dict[str, Any]:
    return _attack(cmd, AdversaryKind.CALUMNIATING, nodes, relays, seed, trace_out)


def attack_collusion(cmd: CLICommand, nodes: int = 10, relays: int = 3, seed: Optional[int] = None,
                     trace_out: Optional[str] = None) -> Dict[str, Any]:
    return _attack(cmd, AdversaryKind.COLLUSION, nodes, relays, seed, trace_out)


_COMMANDS = {
    'honest': 'attack_honest',
    'malicious-transmitter': 'attack_malicious_transmitter',
    'malicious-messenger': 'attack_malicious_messenger',
    'replay': 'attack_replay',
    'calumniating': 'attack_calumniating',
    'collusion': 'attack_collusion',
}


class AttackCommandsLoader:
    """Command loader for attack scenarios."""

    def load_command_table(self, command_loader: CLICommandsLoader):
        with CommandGroup(command_loader, 'attack', 'ygo74.onionchain.interfaces.cli.commands.attack#{}') as g:
            for name, operation in _COMMANDS.items():
                g.command(name, operation)
        return {}

    def load_arguments(self, command_loader: CLICommandsLoader, command):
        with ArgumentsContext(command_loader, 'attack') as arg_context:
            arg_context.argument('nodes', type=int, help='Network members')
            arg_context.argument('relays', type=int, help='Relays per circuit')
            arg_context.argument('seed', type=int, help='Network seed')
            arg_context.argument('trace_out', type=str, help='Write the event trace as JSON lines to this file')

        with ArgumentsContext(command_loader, 'attack malicious-messenger') as arg_context:
            arg_context.argument('variant', type=str, choices=[v.value for v in MessengerVariant],
                                 help='forge fabricates the predecessor evidence, reuse links the genuine one')
