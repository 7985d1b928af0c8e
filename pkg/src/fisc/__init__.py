"""Deterministic crypto-asset tax engine and jurisdiction-attribution simulator."""

__version__ = "0.1.0"
