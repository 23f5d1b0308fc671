"""Benchmark sweep commands writing CSV."""
import logging
from pathlib import Path
from typing import List, Optional

from knack.arguments import ArgumentsContext
from knack.commands import CLICommand, CLICommandsLoader, CommandGroup

from ....application.services.bench_service import BenchService
from ....domain.models.bench import BenchRecord
from ..core.utils import get_settings

logger = logging.getLogger(__name__)

DEFAULT_RELAYS = [3, 5, 10]
DEFAULT_SIZES = [128, 10_000_000]


def _emit(cmd: CLICommand, records: List[BenchRecord], out: Optional[str]) -> None:
    csv = BenchService.to_csv(records)
    if out:
        target = Path(out)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(csv, encoding="utf-8")
        logger.info(f"Wrote {len(records)} rows to {target}")
    else:
        cmd.cli_ctx.out_file.write(csv)


def bench_relays(cmd: CLICommand, relays: Optional[List[int]] = None, payload_bits: int = 128, reps: int = 30,
                 seed: Optional[int] = None, out: Optional[str] = None, include_warmup: bool = False) -> None:
    """Relay-count sweep."""
    service = BenchService(get_settings(cmd), seed=seed, include_warmup=include_warmup)
    _emit(cmd, service.bench_relays(relays or DEFAULT_RELAYS, payload_bits=payload_bits, reps=reps), out)


def bench_payload(cmd: CLICommand, sizes: Optional[List[int]] = None, relays: int = 3, reps: int = 30,
                  seed: Optional[int] = None, out: Optional[str] = None, include_warmup: bool = False) -> None:
    """Payload-size sweep."""
    service = BenchService(get_settings(cmd), seed=seed, include_warmup=include_warmup)
    _emit(cmd, service.bench_payload(sizes or DEFAULT_SIZES, relays=relays, reps=reps), out)


class BenchCommandsLoader:
    """Command loader for benchmark sweeps."""

    def load_command_table(self, command_loader: CLICommandsLoader):
        with CommandGroup(command_loader, 'bench', 'ygo74.onionchain.interfaces.cli.commands.bench#{}') as g:
            g.command('relays', 'bench_relays')
            g.command('payload', 'bench_payload')
        return {}

    def load_arguments(self, command_loader: CLICommandsLoader, command):
        with ArgumentsContext(command_loader, 'bench') as arg_context:
            arg_context.argument('reps', type=int, help='Measured repetitions per row')
            arg_context.argument('seed', type=int, help='Network seed')
            arg_context.argument('out', type=str, help='CSV file, stdout by default')
            arg_context.argument('include_warmup', action='store_true',
                                 help='Keep the cold first iteration in the statistics')

        with ArgumentsContext(command_loader, 'bench relays') as arg_context:
            arg_context.argument('relays', type=int, nargs='+', help='Relay counts to sweep')
            arg_context.argument('payload_bits', type=int, help='Payload size in bits')

        with ArgumentsContext(command_loader, 'bench payload') as arg_context:
            arg_context.argument('sizes', options_list=['--payload-bits', '--sizes'], type=int, nargs='+',
                                 help='Payload sizes in bits to sweep')
            arg_context.argument('relays', type=int, help='Relay count')
