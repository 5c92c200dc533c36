from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal


def round_half_up(value: float, places: int) -> float:
    """Round halves away from zero (0.05 -> 0.1), not banker's rounding.

    Goes through the shortest repr so 94.11764... and 2.675 behave as written.
    """
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))
