"""Tests for mb-hybrid4x."""
