from .domain_exception import DomainException


class SimulationError(DomainException):
    """Base class for simulator failures."""

    exit_code = 8


class TooFewMembers(SimulationError):
    """Raised when a network is spawned below the protocol's membership floor."""

    def __init__(self, members: int, minimum: int):
        self.members = members
        self.minimum = minimum
        super().__init__(f"Network needs at least {minimum} members, got {members}")


class UnknownTarget(SimulationError):
    """Raised when a fault targets a party that is not in the network."""

    def __init__(self, target: str):
        self.target = target
        super().__init__(f"Unknown fault target '{target}'")


class WorkspaceError(SimulationError):
    """Raised when the CLI session file cannot be read or names unknown parties."""
    pass
