"""Shared exception types."""


class VerificationError(Exception):
    """An internal consistency check failed (two routes disagreed)."""
