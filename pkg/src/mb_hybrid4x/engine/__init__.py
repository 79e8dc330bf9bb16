"""Deterministic mini-4X game core."""
