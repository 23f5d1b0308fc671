from .domain_exception import DomainException


class RegistryError(DomainException):
    """Base class for registration protocol failures."""

    exit_code = 5


class NotTheKeyHolder(RegistryError):
    """Raised when a confliction is raised by a party that does not hold the key."""

    def __init__(self, party_id: str):
        self.party_id = party_id
        super().__init__(f"Party '{party_id}' does not hold the disputed key")


class RegistrationRejected(RegistryError):
    """Raised by callers that need a rejected registration as an error."""

    def __init__(self, identity: str, reason: str):
        self.identity = identity
        self.reason = reason
        super().__init__(f"Registration of '{identity}' rejected: {reason}")
