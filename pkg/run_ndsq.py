#!/usr/bin/env python3
"""
NDSQ - Main Entry Point
Runs the gen, train, eval, gradcheck and params commands.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent / "src"))

from cli.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
