"""Merkle tree over transaction handles (SHA-256, last leaf duplicated on odd levels)."""
from typing import List, Sequence, Tuple

from ...domain.models.crypto import Digest
from ..crypto.primitives import digest

# (sibling digest, sibling sits on the left)
MerkleProof = List[Tuple[Digest, bool]]


def _parent(left: Digest, right: Digest) -> Digest:
    return digest(left.hash_bytes + right.hash_bytes)


def _next_level(level: List[Digest]) -> List[Digest]:
    if len(level) % 2 == 1:
        level = level + [level[-1]]
    return [_parent(level[i], level[i + 1]) for i in range(0, len(level), 2)]


def merkle_root(leaves: Sequence[Digest]) -> Digest:
    """Root over the given leaves; zero digest for an empty body."""
    if not leaves:
        return Digest.zero()
    level = list(leaves)
    while len(level) > 1:
        level = _next_level(level)
    return level[0]


def merkle_proof(leaves: Sequence[Digest], index: int) -> MerkleProof:
    """Membership proof for leaves[index].

    Raises:
        IndexError: If index is outside the leaves
    """
    if not 0 <= index < len(leaves):
        raise IndexError(f"Leaf {index} outside a tree of {len(leaves)} leaves")
    proof: MerkleProof = []
    level = list(leaves)
    position = index
    while len(level) > 1:
        if len(level) % 2 == 1:
            level = level + [level[-1]]
        sibling = position ^ 1
        proof.append((level[sibling], sibling < position))
        level = _next_level(level)
        position //= 2
    return proof


def verify_merkle_proof(leaf: Digest, proof: MerkleProof, root: Digest) -> bool:
    current = leaf
    for sibling, sibling_is_left in proof:
        current = _parent(sibling, current) if sibling_is_left else _parent(current, sibling)
    return current == root
