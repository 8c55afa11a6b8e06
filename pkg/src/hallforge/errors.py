"""Error types shared across the package.

Every cap or domain violation raises a subclass of HallforgeError carrying a
stable machine-readable ``code``; the CLI maps codes onto exit statuses.
"""

from __future__ import annotations


class HallforgeError(Exception):
    """Base class; ``code`` is a stable identifier for reports and the CLI."""

    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class SpecError(HallforgeError):
    """Invalid category spec, file format, or argument combination."""

    code = "SPEC_INVALID"


class CapError(HallforgeError):
    """Base for enumeration/search budget violations."""

    code = "CAP_EXCEEDED"


class ExtEnumCapExceeded(CapError):
    code = "EXT_ENUM_CAP_EXCEEDED"


class IsoEnumCapExceeded(CapError):
    code = "ISO_ENUM_CAP_EXCEEDED"


class EndoSearchCapExceeded(CapError):
    code = "ENDO_SEARCH_CAP_EXCEEDED"


class EnumCapExceeded(CapError):
    code = "ENUM_CAP_EXCEEDED"


class WindowOverflow(HallforgeError):
    """Shift pushed a bounded complex outside the configured degree range."""

    code = "WINDOW_OVERFLOW"


class EulerUndefined(HallforgeError):
    """Total Euler form does not exist on this backend (periodic complexes)."""

    code = "EULER_UNDEFINED"


class RelEulerUndefined(HallforgeError):
    """Relative Euler form requires a bounded complex backend."""

    code = "REL_EULER_UNDEFINED"


class DerivedUndefined(HallforgeError):
    """Derived Hall algebra needs the stable category to be left locally
    homologically finite; the periodic backend never is."""

    code = "DERIVED_UNDEFINED"
