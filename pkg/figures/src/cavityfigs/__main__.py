"""Allow running the command-line interface as ``python3 -m cavityfigs``."""

import sys

from cavityfigs.cli import main

if __name__ == "__main__":
    sys.exit(main())
