import math
from typing import Optional

SVG_PLACES = 6
CSV_PLACES = 12


def format_number(value: Optional[float], places: int = SVG_PLACES) -> str:
    """Fixed-point text with negative zero folded to zero; None and NaN become empty."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    text = f"{value:.{places}f}"
    if text.startswith("-") and not text.strip("-0."):
        text = text[1:]
    return text
