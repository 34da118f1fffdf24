"""Standard-library names that only exist from Python 3.11, with equivalents for Python 3.10."""

from __future__ import annotations

import sys
from enum import Enum

if sys.version_info >= (3, 11):
    from enum import StrEnum
    from typing import Self
else:
    from typing_extensions import Self

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum: members are str and str(member) is the value."""

        __str__ = str.__str__
        __format__ = str.__format__

__all__ = ["Self", "StrEnum"]
