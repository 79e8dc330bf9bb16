"""Metrics, regressions and reports over persisted game records."""
