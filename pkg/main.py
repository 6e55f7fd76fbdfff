"""Entry point at the project root: python main.py <subcommand> [flags]."""

import sys

from src.main import run

if __name__ == "__main__":
    sys.exit(run())
