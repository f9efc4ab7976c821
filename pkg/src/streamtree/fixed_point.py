"""Q2.30 saturating fixed-point arithmetic.

32-bit two's-complement words with a 30-bit fraction: value = raw / 2**30,
range [-2, 2 - 2**-30], resolution 2**-30. Overflow saturates to the range
edge instead of wrapping. Scalar ops live on :class:`Fixed30`; the
``*_raw`` helpers work on plain ints / int64 numpy arrays so bulk updates
can run without boxing.
"""

from __future__ import annotations

import numpy as np

FRAC_BITS = 30
SCALE = 1 << FRAC_BITS
RAW_MIN = -(1 << 31)
RAW_MAX = (1 << 31) - 1
HALF = 1 << (FRAC_BITS - 1)


def saturate_raw(v: int) -> int:
    if v > RAW_MAX:
        return RAW_MAX
    if v < RAW_MIN:
        return RAW_MIN
    return v


def float_to_raw(x: float) -> int:
    """Quantize a real to a raw Q2.30 word (round-half-even, saturating)."""
    # x * 2**30 is exact for any float64: scaling by a power of two only
    # shifts the exponent, so round() sees the true rational value.
    return saturate_raw(round(x * SCALE))


def raw_to_float(raw: int) -> float:
    return raw / SCALE


def add_raw(a: int, b: int) -> int:
    return saturate_raw(a + b)


def sub_raw(a: int, b: int) -> int:
    return saturate_raw(a - b)


def mul_raw(a: int, b: int) -> int:
    """Full-width product reduced back to Q2.30 with round-half-even."""
    q, r = divmod(a * b, SCALE)
    if r > HALF or (r == HALF and q & 1):
        q += 1
    return saturate_raw(q)


class Fixed30:
    """One Q2.30 value. Arithmetic saturates; comparisons follow raw order."""

    __slots__ = ("raw",)

    def __init__(self, raw: int):
        if not RAW_MIN <= raw <= RAW_MAX:
            raise ValueError(f"raw word {raw} outside 32-bit range")
        self.raw = raw

    @classmethod
    def from_float(cls, x: float) -> "Fixed30":
        return cls(float_to_raw(x))

    def to_float(self) -> float:
        return self.raw / SCALE

    def __add__(self, other: "Fixed30") -> "Fixed30":
        return Fixed30(add_raw(self.raw, other.raw))

    def __sub__(self, other: "Fixed30") -> "Fixed30":
        return Fixed30(sub_raw(self.raw, other.raw))

    def __mul__(self, other: "Fixed30") -> "Fixed30":
        return Fixed30(mul_raw(self.raw, other.raw))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Fixed30) and self.raw == other.raw

    def __lt__(self, other: "Fixed30") -> bool:
        return self.raw < other.raw

    def __le__(self, other: "Fixed30") -> bool:
        return self.raw <= other.raw

    def __hash__(self) -> int:
        return hash(self.raw)

    def __repr__(self) -> str:
        return f"Fixed30({self.to_float():.10f})"


def float_to_raw_array(x: np.ndarray, out: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Vectorized quantization. Returns (int64 raw array, saturation count)."""
    scaled = np.rint(np.asarray(x, dtype=np.float64) * SCALE)
    saturated = int(np.count_nonzero((scaled > RAW_MAX) | (scaled < RAW_MIN)))
    raw = scaled.astype(np.int64)
    np.clip(raw, RAW_MIN, RAW_MAX, out=raw)
    if out is not None:
        out[...] = raw
        return out, saturated
    return raw, saturated


def raw_to_float_array(raw: np.ndarray) -> np.ndarray:
    return raw.astype(np.float64) / SCALE


def saturate_raw_array(raw: np.ndarray) -> int:
    """In-place clip of an int64 array to the 32-bit window; returns lanes clipped."""
    saturated = int(np.count_nonzero((raw > RAW_MAX) | (raw < RAW_MIN)))
    if saturated:
        np.clip(raw, RAW_MIN, RAW_MAX, out=raw)
    return saturated
