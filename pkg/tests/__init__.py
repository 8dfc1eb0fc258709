"""Tests for warped-segre."""
