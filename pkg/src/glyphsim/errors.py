"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
DegenerateError -> 4. Library code raises, never exits.
"""


class GlyphSimError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(GlyphSimError):
    """Bad run configuration: missing paths, out-of-range thresholds."""


class DataError(GlyphSimError):
    """Malformed input data: fonts, confusables lines, embedding files."""


class DegenerateError(GlyphSimError):
    """Input is structurally valid but degenerate (blank bitmap, constant
    scores, empty sample pool)."""
