"""Protocol for the network a transmission runs on."""
from typing import List, Protocol

from ..models.onion import Circuit, Message, SessionReport


class PartyNetwork(Protocol):
    """Message passing between registered parties."""

    def members(self) -> List[str]:
        """Party ids eligible as circuit endpoints or relays.

        Returns:
            List[str]: Registered party ids
        """
        ...

    def now(self) -> int:
        """Logical clock in milliseconds."""
        ...

    def launch(self, transmitter: str, circuit: Circuit, message: Message) -> None:
        """Have the transmitter open the circuit and send the message, then run until idle.

        Args:
            transmitter (str): Sending party
            circuit (Circuit): Circuit skeleton without hop keys
            message (Message): Message to deliver
        """
        ...

    def session_report(self, session_id: str) -> SessionReport:
        """Observed outcome of a session.

        Args:
            session_id (str): Session token

        Returns:
            SessionReport: Committed evidence, delivery and failure
        """
        ...
