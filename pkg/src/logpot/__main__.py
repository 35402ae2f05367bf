"""Main entry point for python -m logpot."""

from .cli import app

if __name__ == "__main__":
    app()
