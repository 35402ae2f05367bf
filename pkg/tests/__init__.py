"""Test suite for logpot."""
