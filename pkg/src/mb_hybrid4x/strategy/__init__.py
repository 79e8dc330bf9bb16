"""Macro-decision surface: strategy catalog, flavor deltas, persona mapping, overrides."""
