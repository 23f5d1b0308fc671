"""Onionchain command line."""
import logging
import os
import sys
from typing import Dict, List, Optional, TextIO

from knack.cli import CLI
from knack.commands import CLICommandsLoader, CommandGroup
from knack.help_files import helps

from ...config.logging_config import setup_logging
from ...config.settings import Settings, settings as default_settings
from ...domain.exceptions import DomainException
from ...infrastructure.observability.metrics_service import get_metrics_service, initialize_metrics_service
from .commands.attack import AttackCommandsLoader
from .commands.bench import BenchCommandsLoader
from .commands.ledger import LedgerCommandsLoader
from .commands.protocol import ProtocolCommandsLoader

logger = logging.getLogger(__name__)

CLI_NAME = "onionchain"

helps[''] = """
    type: group
    short-summary: Accountable onion routing on a permissioned ledger.
    long-summary: Register parties, send onion-routed messages, disclose the origin of a false message,
        run attack scenarios and benchmark sweeps on a deterministic simulated network.
"""

helps['register'] = """
type: command
short-summary: Register an identity and print its committed handle.
examples:
    - name: register a new party in the default workspace.
      text: {cli_name} register --id alice
""".format(cli_name=CLI_NAME)

helps['send'] = """
type: command
short-summary: Transmit a message and print the evidence handles of the receipt.
examples:
    - name: send 128 random bits over 3 relays.
      text: {cli_name} send --from node-00 --to node-01 --relays 3 --payload-bits 128
""".format(cli_name=CLI_NAME)

helps['disclose'] = """
type: command
short-summary: Accuse a delivered message; the exit code encodes the culprit reason.
long-summary: 0 TransmitterOrigin, 10 RefusedPlea, 11 ForgedEvidence, 12 CalumniatingReceiver.
"""

helps['attack'] = """
    type: group
    short-summary: Run a scripted attack on a fresh network; exit code 1 when it is not defeated.
"""

helps['bench'] = """
    type: group
    short-summary: Timing sweeps written as CSV.
"""

helps['ledger'] = """
    type: group
    short-summary: Chain file tools.
"""

helps['version'] = """
    type: command
    short-summary: display the CLI version.
"""

_LOADERS = (ProtocolCommandsLoader, AttackCommandsLoader, BenchCommandsLoader, LedgerCommandsLoader)


class OnionchainCommandsLoader(CLICommandsLoader):
    """Command loader for the Onionchain CLI."""

    def load_command_table(self, args):
        with CommandGroup(self, '', 'ygo74.onionchain.interfaces.cli.__main__#{}') as g:
            g.command('version', 'show_version')
        for loader in _LOADERS:
            loader().load_command_table(self)
        return super().load_command_table(args)

    def load_arguments(self, command):
        for loader in _LOADERS:
            loader().load_arguments(self, command)
        super().load_arguments(command)


class OnionchainCLI(CLI):
    """knack CLI mapping domain errors to their family exit codes."""

    def exception_handler(self, ex):
        if isinstance(ex, DomainException):
            logger.error(f"{type(ex).__name__}: {ex}")
            return ex.exit_code
        return super().exception_handler(ex)


def show_version() -> Dict[str, str]:
    """Show the CLI version."""
    from ... import __version__
    return {'version': __version__}


def main(argv: Optional[List[str]] = None, out_file: Optional[TextIO] = None,
         app_settings: Optional[Settings] = None) -> int:
    """Run the CLI and return its exit code.

    Args:
        argv (Optional[List[str]]): Arguments, sys.argv[1:] by default
        out_file (Optional[TextIO]): Command output, stdout by default
        app_settings (Optional[Settings]): Settings, loaded from the environment by default

    Returns:
        int: 0 on success, 2 on usage errors, the error family or verdict code otherwise
    """
    app_settings = app_settings or default_settings
    setup_logging(app_settings.observability)
    if app_settings.observability.metrics_enabled and get_metrics_service() is None:
        initialize_metrics_service(CLI_NAME)

    cli = OnionchainCLI(
        cli_name=CLI_NAME,
        config_dir=os.path.expanduser('~/.onionchain'),
        config_env_var_prefix='ONIONCHAIN',
        commands_loader_cls=OnionchainCommandsLoader,
        out_file=out_file or sys.stdout,
    )
    cli.data['settings'] = app_settings
    try:
        exit_code = cli.invoke(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        # argparse exits on --help and on usage errors
        return exc.code if isinstance(exc.code, int) else 2
    if exit_code == 0:
        exit_code = cli.data.get('exit_code', 0)
    return exit_code


def run() -> None:
    """Console script entry point."""
    sys.exit(main())


if __name__ == '__main__':
    run()
