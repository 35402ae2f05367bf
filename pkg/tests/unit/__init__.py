"""Unit tests for logpot."""
