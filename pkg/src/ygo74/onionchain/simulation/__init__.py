"""Deterministic network simulator with scripted adversaries."""
from .network import MIN_MEMBERS, Network, spawn_network
from .node import Node
from .scenarios import run_scenario

__all__ = ["MIN_MEMBERS", "Network", "spawn_network", "Node", "run_scenario"]
