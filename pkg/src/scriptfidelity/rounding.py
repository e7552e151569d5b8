"""Display rounding shared by tables and reports."""

from decimal import ROUND_HALF_UP, Decimal


def round_half_away(x: float, ndigits: int = 1) -> float:
    """Round half away from zero on the decimal repr (``0.25 -> 0.3``)."""
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def fmt_pct(x: float | None, ndigits: int = 1) -> str:
    """Format a percentage value; ``None`` renders as ``---``."""
    if x is None:
        return "---"
    return f"{round_half_away(x, ndigits):.{ndigits}f}"
