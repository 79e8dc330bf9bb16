"""Experiment orchestration and record persistence."""
