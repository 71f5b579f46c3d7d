"""Run the command-line interface via ``python -m polyfal``."""

import sys

from polyfal.cli.main import main

sys.exit(main())
