"""ygo74 namespace package."""
