"""Integration tests for logpot."""
