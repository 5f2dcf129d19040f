"""Run the full reproduction suite without installing the console script.

Thin wrapper over `shiftq paper-suite`; flags are passed straight through.
"""

import sys

from shiftq.cli import main

if __name__ == "__main__":
    raise SystemExit(main(["paper-suite", *sys.argv[1:]]))
