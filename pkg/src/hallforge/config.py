"""Enumeration budgets.

All exhaustive searches are capped so that a bad input fails fast with a
typed error instead of hanging.  Caps count *elements enumerated*, i.e.
p**dim for a search over an F_p vector space of dimension dim.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Caps:
    max_ext_enum: int = 2**16   # extension classes enumerated per pair
    max_hom_enum: int = 2**20   # hom-space elements scanned in iso searches
    max_endo_enum: int = 2**16  # endomorphisms scanned for a splitting
    max_enum: int = 2**20       # raw objects enumerated per dimension slice

    def __post_init__(self):
        for name in ("max_ext_enum", "max_hom_enum", "max_endo_enum", "max_enum"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


DEFAULT_CAPS = Caps()
