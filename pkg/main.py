"""Main entry point for the coupled-waves command line."""
import sys

from src.adapter.driving.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
