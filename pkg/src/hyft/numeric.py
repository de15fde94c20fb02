"""Bit-level codecs between IEEE-style float fields and two's-complement fixed point.

Everything here works on Python integers so results are exact and
platform independent.  Floats only appear at the edges (``value``) and are
exact there too, because every width used by the emulator fits a double.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractViolationError, FloatOverflowError, InvalidInputError


class FloatMode(enum.Enum):
    HALF = "fp16"
    FULL = "fp32"

    @property
    def exponent_bits(self) -> int:
        return 5 if self is FloatMode.HALF else 8

    @property
    def mantissa_bits(self) -> int:
        return 10 if self is FloatMode.HALF else 23

    @property
    def bias(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def width(self) -> int:
        return 1 + self.exponent_bits + self.mantissa_bits

    @property
    def min_exponent(self) -> int:
        """Smallest unbiased exponent of a normal number."""
        return 1 - self.bias

    @property
    def max_exponent(self) -> int:
        return (1 << self.exponent_bits) - 2 - self.bias

    @property
    def numpy_dtype(self):
        return np.float16 if self is FloatMode.HALF else np.float32

    @property
    def uint_dtype(self):
        return np.uint16 if self is FloatMode.HALF else np.uint32

    @classmethod
    def parse(cls, name: "str | FloatMode") -> "FloatMode":
        if isinstance(name, FloatMode):
            return name
        key = str(name).lower()
        aliases = {"fp16": cls.HALF, "half": cls.HALF, "fp32": cls.FULL, "full": cls.FULL}
        try:
            return aliases[key]
        except KeyError:
            raise InvalidInputError(f"unknown float mode {name!r}") from None


@dataclass(frozen=True)
class FloatFields:
    """A decoded float ``(-1)^sign * 2^exponent * (1 + mant / 2^mant_bits)``.

    ``exponent`` is unbiased and unbounded: internal results such as tiny
    exponentials may sit far below the normal range of the I/O format.
    Zero is carried by the ``zero`` flag (flush-to-zero results only).
    """

    sign: int
    exponent: int
    mant: int
    mant_bits: int
    zero: bool = False

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ContractViolationError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.mant < (1 << self.mant_bits):
            raise ContractViolationError(
                f"mantissa {self.mant} does not fit {self.mant_bits} bits"
            )

    @classmethod
    def make_zero(cls, mant_bits: int, sign: int = 0) -> "FloatFields":
        return cls(sign, 0, 0, mant_bits, zero=True)

    @property
    def frac(self) -> Fraction:
        """Mantissa fraction m in [0, 1)."""
        return Fraction(self.mant, 1 << self.mant_bits)

    @property
    def exact(self) -> Fraction:
        if self.zero:
            return Fraction(0)
        mag = Fraction((1 << self.mant_bits) + self.mant, 1 << self.mant_bits)
        mag *= Fraction(2) ** self.exponent
        return -mag if self.sign else mag

    @property
    def value(self) -> float:
        if self.zero:
            return -0.0 if self.sign else 0.0
        mag = ((1 << self.mant_bits) + self.mant) / (1 << self.mant_bits)
        mag = math.ldexp(mag, self.exponent)
        return -mag if self.sign else mag

    @property
    def positive(self) -> bool:
        return not self.zero and self.sign == 0


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class FixedPoint:
    """Two's-complement fixed point: ``raw / 2^frac_bits`` with ``int_bits`` integer bits.

    The sign bit is extra, so ``raw`` occupies ``int_bits + frac_bits + 1`` bits.
    ``saturated`` records that a conversion clipped to the representable range.
    """

    raw: int
    frac_bits: int
    int_bits: int
    saturated: bool = False

    def __post_init__(self):
        bound = 1 << (self.int_bits + self.frac_bits)
        if not -bound <= self.raw < bound:
            raise ContractViolationError(
                f"raw {self.raw} does not fit Q{self.int_bits}.{self.frac_bits}"
            )

    @staticmethod
    def max_raw(frac_bits: int, int_bits: int) -> int:
        return (1 << (int_bits + frac_bits)) - 1

    @staticmethod
    def min_raw(frac_bits: int, int_bits: int) -> int:
        return -(1 << (int_bits + frac_bits))

    @classmethod
    def from_value(cls, x, frac_bits: int, int_bits: int) -> "FixedPoint":
        """Floor-quantize an exact number (int, Fraction or float) with saturation."""
        raw = Fraction(x) * (1 << frac_bits)
        return cls._saturating(raw.numerator // raw.denominator, frac_bits, int_bits)

    @classmethod
    def _saturating(cls, raw: int, frac_bits: int, int_bits: int) -> "FixedPoint":
        hi = cls.max_raw(frac_bits, int_bits)
        lo = cls.min_raw(frac_bits, int_bits)
        if raw > hi:
            return cls(hi, frac_bits, int_bits, saturated=True)
        if raw < lo:
            return cls(lo, frac_bits, int_bits, saturated=True)
        return cls(raw, frac_bits, int_bits)

    @property
    def exact(self) -> Fraction:
        return Fraction(self.raw, 1 << self.frac_bits)

    @property
    def value(self) -> float:
        return self.raw / (1 << self.frac_bits)

    def _aligned(self, other: "FixedPoint") -> tuple[int, int]:
        f = max(self.frac_bits, other.frac_bits)
        return self.raw << (f - self.frac_bits), other.raw << (f - other.frac_bits)

    def __eq__(self, other):
        if not isinstance(other, FixedPoint):
            return NotImplemented
        a, b = self._aligned(other)
        return a == b

    def __lt__(self, other):
        if not isinstance(other, FixedPoint):
            return NotImplemented
        a, b = self._aligned(other)
        return a < b

    def __hash__(self):
        return hash(self.exact)

    def __repr__(self):
        return f"FixedPoint({self.value!r}, Q{self.int_bits}.{self.frac_bits})"


def decode_float(bits: int, mode: FloatMode) -> FloatFields:
    """Split a float word into fields.  Subnormals flush to (signed) zero."""
    mode = FloatMode.parse(mode)
    if not 0 <= bits < (1 << mode.width):
        raise InvalidInputError(f"0x{bits:x} is not a {mode.width}-bit word")
    L = mode.mantissa_bits
    sign = bits >> (mode.width - 1)
    biased = (bits >> L) & ((1 << mode.exponent_bits) - 1)
    mant = bits & ((1 << L) - 1)
    if biased == (1 << mode.exponent_bits) - 1:
        raise InvalidInputError(f"0x{bits:x} is NaN or infinity in {mode.value}")
    if biased == 0:
        return FloatFields.make_zero(L, sign)
    return FloatFields(sign, biased - mode.bias, mant, L)


def encode_float(f: FloatFields, mode: FloatMode) -> int:
    """Pack fields into a float word.  Exponents below the normal range encode as zero."""
    mode = FloatMode.parse(mode)
    L = mode.mantissa_bits
    if f.mant_bits != L:
        raise ContractViolationError(
            f"mantissa width {f.mant_bits} does not match {mode.value} ({L})"
        )
    sign = f.sign << (mode.width - 1)
    if f.zero or f.exponent < mode.min_exponent:
        return sign
    if f.exponent > mode.max_exponent:
        raise FloatOverflowError(
            f"exponent {f.exponent} exceeds {mode.value} maximum {mode.max_exponent}"
        )
    return sign | ((f.exponent + mode.bias) << L) | f.mant


def floats_to_fields(xs, mode: FloatMode) -> list[FloatFields]:
    """Round host floats into the I/O format (nearest-even) and decode them."""
    mode = FloatMode.parse(mode)
    host = np.asarray(xs, dtype=np.float64).ravel()
    if not np.all(np.isfinite(host)):
        raise InvalidInputError("non-finite input")
    with np.errstate(over="ignore"):
        words = host.astype(mode.numpy_dtype)
    if not np.all(np.isfinite(words)):
        raise InvalidInputError(f"input overflows {mode.value}")
    return [decode_float(w, mode) for w in words.view(mode.uint_dtype).tolist()]


def float_to_fields(x: float, mode: FloatMode) -> FloatFields:
    return floats_to_fields([x], mode)[0]


def fp2fx(f: FloatFields, frac_bits: int, int_bits: int) -> FixedPoint:
    """Float fields to fixed point, truncating toward minus infinity.

    Out-of-range magnitudes saturate to the nearest bound with ``saturated`` set.
    """
    if f.zero:
        return FixedPoint(0, frac_bits, int_bits)
    mag = (1 << f.mant_bits) | f.mant
    signed = -mag if f.sign else mag
    shift = f.exponent + frac_bits - f.mant_bits
    raw = signed << shift if shift >= 0 else signed >> -shift
    return FixedPoint._saturating(raw, frac_bits, int_bits)


def lod(x: FixedPoint) -> int:
    """Leading-one position p with 2^p <= x < 2^(p+1)."""
    if x.raw <= 0:
        raise InvalidInputError("leading-one detection needs a positive operand")
    return x.raw.bit_length() - 1 - x.frac_bits


def fx2fp_via_lod(x: FixedPoint, mode: FloatMode) -> FloatFields:
    """Renormalize a positive fixed-point value, truncating the mantissa to L bits."""
    mode = FloatMode.parse(mode)
    L = mode.mantissa_bits
    p = lod(x)
    top = x.raw.bit_length() - 1
    if top >= L:
        mant = (x.raw >> (top - L)) - (1 << L)
    else:
        mant = (x.raw << (L - top)) - (1 << L)
    return FloatFields(0, p, mant, L)


def asr(x: FixedPoint, k: int) -> FixedPoint:
    """Arithmetic right shift of the raw word (floor semantics)."""
    if k < 0:
        raise ContractViolationError("shift amount must be non-negative")
    return FixedPoint(x.raw >> k, x.frac_bits, x.int_bits)
