"""Protocol for reaching parties named during an identity disclosure."""
from typing import List, Optional, Protocol

from ..models.crypto import Digest, SymmetricKey
from ..models.disclosure import Rebuttal


class PleaProvider(Protocol):
    """Parties' answers to disclosure demands.

    Every demand carries the number of blocks the party may let pass before
    answering. None means the party refused or stayed silent for that long.
    """

    def release_proof_key(self, party_id: str, evidence_handle: Digest,
                          timeout_blocks: int) -> Optional[SymmetricKey]:
        ...

    def rebut(self, party_id: str, pleader: str, prev_handle: Optional[Digest],
              timeout_blocks: int) -> Optional[Rebuttal]:
        """Ask a blamed predecessor for its own evidence with the pleader.

        Args:
            party_id (str): Blamed party
            pleader (str): Party whose evidence names it
            prev_handle (Optional[Digest]): Back-pointer both evidences should share
            timeout_blocks (int): Blocks the party may let pass

        Returns:
            Optional[Rebuttal]: Committed evidence handle and its proof key
        """
        ...

    def confess(self, party_id: str, evidence_handle: Digest, timeout_blocks: int) -> Optional[List[SymmetricKey]]:
        """Ask the transmitter for the hop keys of the session that produced evidence_handle."""
        ...
