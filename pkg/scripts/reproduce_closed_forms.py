#!/usr/bin/env python3
"""Run the bundled golden table of closed-form values and print the report.

Exit status is nonzero when any expectation fails, so this doubles as a
quick regression gate:

    python3 scripts/reproduce_closed_forms.py [--format table|json|csv]
"""

import sys

from rz_pairing_lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", *sys.argv[1:]]))
