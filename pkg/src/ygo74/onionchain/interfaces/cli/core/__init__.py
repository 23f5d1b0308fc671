"""CLI workspace and helpers."""
