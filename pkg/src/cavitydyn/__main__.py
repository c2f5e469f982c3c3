"""Allow running the command-line interface as ``python3 -m cavitydyn``."""

import sys

from cavitydyn.cli import main

if __name__ == "__main__":
    sys.exit(main())
