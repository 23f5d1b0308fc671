class DomainException(Exception):
    """Base domain exception."""

    exit_code: int = 1
