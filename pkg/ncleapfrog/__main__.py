from __future__ import annotations

import sys

from ncleapfrog.cli import main

sys.exit(main())
