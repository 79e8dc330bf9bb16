"""Flavor-weighted tactical executor and the builtin macro strategist."""
