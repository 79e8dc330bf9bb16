"""Bundled rule data, tool descriptors and prompt templates."""
