"""Allow ``python -m sdnbi``."""

import sys

from sdnbi.cli import main

sys.exit(main())
