from typing import Optional

from knack.commands import CLICommand

from ....config.settings import Settings, settings as default_settings
from .workspace import Workspace


def _context_data(cmd: CLICommand) -> dict:
    cli_ctx = getattr(cmd, "cli_ctx", None)
    if cli_ctx is None or not hasattr(cli_ctx, "data"):
        raise ValueError("CLI context is not properly initialized.")
    return cli_ctx.data


def get_settings(cmd: CLICommand) -> Settings:
    """Settings the CLI was started with."""
    return _context_data(cmd).get("settings") or default_settings


def get_workspace(cmd: CLICommand, state_dir: Optional[str] = None) -> Workspace:
    """Open the workspace in state_dir, the configured state directory by default."""
    return Workspace(state_dir, get_settings(cmd))


def set_exit_code(cmd: CLICommand, code: int) -> None:
    """Exit code returned by main() when the command itself succeeded."""
    _context_data(cmd)["exit_code"] = code
