"""Unicode scalar value helpers.

A codepoint is carried around as a plain int; these helpers validate and
format it. Surrogates (U+D800..U+DFFF) are not scalar values and are
rejected everywhere.
"""

MAX_CODEPOINT = 0x10FFFF
_SURROGATE_LO = 0xD800
_SURROGATE_HI = 0xDFFF


def is_scalar(value: int) -> bool:
    """True for a valid Unicode scalar value (0..0x10FFFF, no surrogates)."""
    return 0 <= value <= MAX_CODEPOINT and not (_SURROGATE_LO <= value <= _SURROGATE_HI)


def check_scalar(value: int) -> int:
    if not isinstance(value, int) or not is_scalar(value):
        raise ValueError(f"not a Unicode scalar value: {value!r}")
    return value


def to_hex(value: int) -> str:
    """Uppercase hex, at least 4 digits, matching U+ notation conventions."""
    return f"{value:04X}"


def parse_hex(text: str) -> int:
    try:
        value = int(text, 16)
    except ValueError:
        raise ValueError(f"invalid codepoint hex: {text!r}") from None
    if not is_scalar(value):
        raise ValueError(f"not a Unicode scalar value: U+{text}")
    return value
