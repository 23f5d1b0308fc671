from .domain_exception import DomainException


class CryptoError(DomainException):
    """Base class for cryptographic contract failures."""

    exit_code = 3


class AuthenticationFailure(CryptoError):
    """Raised when authenticated decryption fails (wrong key or tampered ciphertext)."""
    pass


class MalformedEncoding(CryptoError):
    """Raised when canonical bytes cannot be decoded."""
    pass


class PeerUnreachable(CryptoError):
    """Raised when a key agreement peer cannot be reached."""

    def __init__(self, party_id: str):
        """Initialize exception.

        Args:
            party_id (str): Party that could not be reached
        """
        self.party_id = party_id
        super().__init__(f"Peer '{party_id}' is unreachable")
