"""Exact amplitudes of the reduced walk.

Every amplitude reached after ``e`` walk steps lies in ``3**-e * Z[sqrt 2]``,
so it is stored as three integers ``(a, b, e)`` with value
``(a + b*sqrt(2)) / 3**e``. The exponent is never reduced: it always equals the
number of steps applied, which keeps addition free of alignment work.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

__all__ = [
    "Entry",
    "ExactAmplitude",
    "FactorFingerprint",
    "MixedAmplitudeError",
    "exact_add",
    "exact_mul_entry",
    "fingerprint",
    "to_float",
]


class MixedAmplitudeError(ValueError):
    """Raised when both the rational and the sqrt(2) part are nonzero."""


class Entry(enum.Enum):
    """The closed set of matrix entries that occur in the reduced coin and shift."""

    ONE = "1"
    MINUS_THIRD = "-1/3"
    THIRD = "1/3"
    TWO_SQRT2_THIRD = "2sqrt2/3"
    ZERO = "0"


@dataclass(frozen=True)
class ExactAmplitude:
    a: int
    b: int
    e: int

    def __post_init__(self) -> None:
        if self.e < 0:
            raise ValueError(f"denominator exponent must be non-negative, got {self.e}")

    def __add__(self, other: ExactAmplitude) -> ExactAmplitude:
        return exact_add(self, other)

    def __neg__(self) -> ExactAmplitude:
        return ExactAmplitude(-self.a, -self.b, self.e)

    def __float__(self) -> float:
        return to_float(self)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def square(self) -> tuple[int, int]:
        """Numerator of the square as ``(r, s)``: value**2 == (r + s*sqrt2) / 9**e."""
        return self.a * self.a + 2 * self.b * self.b, 2 * self.a * self.b

    def __str__(self) -> str:
        return f"a={self.a} b={self.b} e={self.e}"

    @classmethod
    def parse(cls, text: str) -> ExactAmplitude:
        fields = {}
        for token in text.split():
            key, sep, value = token.partition("=")
            if not sep or key not in ("a", "b", "e") or key in fields:
                raise ValueError(f"malformed exact amplitude: {text!r}")
            fields[key] = int(value)
        if len(fields) != 3:
            raise ValueError(f"malformed exact amplitude: {text!r}")
        return cls(fields["a"], fields["b"], fields["e"])


def exact_add(x: ExactAmplitude, y: ExactAmplitude) -> ExactAmplitude:
    if x.e != y.e:
        raise ValueError(f"exponent mismatch: {x.e} != {y.e}")
    return ExactAmplitude(x.a + y.a, x.b + y.b, x.e)


def exact_mul_entry(x: ExactAmplitude, m: Entry) -> ExactAmplitude:
    """Multiply by one of the reduced-walk matrix entries.

    Entries with denominator 3 raise ``e`` by one. ``ONE`` and ``ZERO`` keep
    ``e``; callers that need a uniform exponent scale identity entries as 3/3.
    """
    if not isinstance(m, Entry):
        raise ValueError(f"unsupported matrix entry: {m!r}")
    if m is Entry.ONE:
        return x
    if m is Entry.ZERO:
        return ExactAmplitude(0, 0, x.e)
    if m is Entry.MINUS_THIRD:
        return ExactAmplitude(-x.a, -x.b, x.e + 1)
    if m is Entry.THIRD:
        return ExactAmplitude(x.a, x.b, x.e + 1)
    # 2*sqrt2 * (a + b*sqrt2) = 4b + 2a*sqrt2
    return ExactAmplitude(4 * x.b, 2 * x.a, x.e + 1)


def to_float(x: ExactAmplitude) -> float:
    """Round ``(a + b*sqrt2) / 3**e`` to the nearest binary64.

    sqrt(2) is taken with enough fractional bits that cancellation between the
    two parts cannot cost precision: a nonzero ``a + b*sqrt2`` is at least
    ``1 / (|a| + 2|b|)`` in magnitude, because ``|a**2 - 2*b**2| >= 1``.
    """
    a, b, e = x.a, x.b, x.e
    if b == 0:
        return float(Fraction(a, 3**e))
    bits = 2 * max(abs(a).bit_length(), abs(b).bit_length() + 1) + 96
    sqrt2_scaled = isqrt(2 << (2 * bits))  # floor(sqrt2 * 2**bits)
    numerator = (a << bits) + b * sqrt2_scaled
    return float(Fraction(numerator, 3**e << bits))


@dataclass(frozen=True)
class FactorFingerprint:
    two_exponent: int
    odd_part: int
    three_exponent_denominator: int
    has_sqrt2_factor: bool
    negative: bool = False

    def __str__(self) -> str:
        sqrt2 = " * sqrt2" if self.has_sqrt2_factor else ""
        sign = "-" if self.negative else ""
        return (
            f"{sign}2^{self.two_exponent} * {self.odd_part}{sqrt2}"
            f" / 3^{self.three_exponent_denominator}"
        )

    def cancel_threes(self) -> FactorFingerprint:
        """Divide out powers of 3 shared by the odd part and the denominator."""
        odd, e = self.odd_part, self.three_exponent_denominator
        while e > 0 and odd % 3 == 0:
            odd //= 3
            e -= 1
        return FactorFingerprint(self.two_exponent, odd, e, self.has_sqrt2_factor, self.negative)

    def value(self) -> float:
        """Signed numeric value, evaluated in log space so huge parts do not overflow."""
        from math import log2

        exponent = (
            self.two_exponent
            + log2(self.odd_part)
            - self.three_exponent_denominator * log2(3)
            + (0.5 if self.has_sqrt2_factor else 0.0)
        )
        return (-1.0 if self.negative else 1.0) * 2.0**exponent


def fingerprint(x: ExactAmplitude) -> FactorFingerprint:
    if x.a != 0 and x.b != 0:
        raise MixedAmplitudeError(f"mixed amplitude, both parts nonzero: {x}")
    if x.a == 0 and x.b == 0:
        raise ValueError("cannot fingerprint a zero amplitude")
    value = x.a if x.a != 0 else x.b
    magnitude = abs(value)
    k = (magnitude & -magnitude).bit_length() - 1
    return FactorFingerprint(
        two_exponent=k,
        odd_part=magnitude >> k,
        three_exponent_denominator=x.e,
        has_sqrt2_factor=x.a == 0,
        negative=value < 0,
    )
