#!/usr/bin/env python3
"""
Relative-Smoothness Toolkit - Main Application Entry Point

First-order convex optimization with reference functions: primal gradient
and dual averaging solvers, smoothness certificates and the D-optimal
design benchmark.
"""

import sys
from pathlib import Path

# Add src to Python path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.core.config import Config
from src.core.exceptions import ConfigurationError
from src.ui.cli import EXIT_INPUT, main as cli_main


def main():
    """Main entry point for the relative-smoothness toolkit."""
    try:
        # Validate configuration
        Config.validate()
    except ConfigurationError as e:
        print(f"❌ Configuration Error: {e}")
        print("💡 Check the RELSMOOTH_* environment variables and your .env file")
        sys.exit(EXIT_INPUT)

    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
