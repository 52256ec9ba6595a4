"""Allow running the command line interface via ``python -m swiptmec``."""

import sys

from swiptmec.cli import main

if __name__ == "__main__":
    sys.exit(main())
