"""Allows `python -m mbm_forensics`."""

import sys

from .main import main

sys.exit(main())
