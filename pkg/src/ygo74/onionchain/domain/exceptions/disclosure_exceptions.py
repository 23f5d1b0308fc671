from .domain_exception import DomainException


class DisclosureError(DomainException):
    """Base class for identity disclosure failures."""

    exit_code = 7


class EvidenceNotFound(DisclosureError):
    """Raised when the accused evidence handle is not committed."""

    def __init__(self, handle_hex: str):
        self.handle_hex = handle_hex
        super().__init__(f"Evidence {handle_hex} not found on the ledger")


class KeyDoesNotOpenEvidence(DisclosureError):
    """Raised when the released proof key does not decrypt the terminal evidence."""

    def __init__(self, handle_hex: str):
        self.handle_hex = handle_hex
        super().__init__(f"Released key does not open evidence {handle_hex}")


class DisclosureNotApproved(DisclosureError):
    """Raised when a disclosure walk is requested without majority approval."""

    def __init__(self, request_hex: str, approvals: int, members: int):
        self.request_hex = request_hex
        self.approvals = approvals
        self.members = members
        super().__init__(f"Disclosure {request_hex} has {approvals} approvals out of {members} members")


class TraceBroken(DisclosureError):
    """Raised when an evidence back-pointer resolves to nothing."""

    def __init__(self, handle_hex: str):
        self.handle_hex = handle_hex
        super().__init__(f"Evidence back-pointer {handle_hex} does not resolve")


class KeysDoNotOpenOnion(DisclosureError):
    """Raised when the confessed hop keys do not peel the recovered onion."""

    def __init__(self, layer: int):
        self.layer = layer
        super().__init__(f"Confessed keys fail at onion layer {layer}")
