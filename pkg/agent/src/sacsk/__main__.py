"""Module entry point so `python -m sacsk` behaves like `sacsk-train`."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
