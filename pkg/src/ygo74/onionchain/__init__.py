"""Onionchain: accountable onion routing over a permissioned ledger."""

__version__ = "0.1.0"
