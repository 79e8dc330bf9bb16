"""Composition root, service facade, results and errors."""
