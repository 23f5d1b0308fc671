"""Contracts the protocol services expect from their environment."""
from .party_network import PartyNetwork
from .plea_provider import PleaProvider

__all__ = ["PartyNetwork", "PleaProvider"]
