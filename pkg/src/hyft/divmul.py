"""Shared division/multiplication unit working on float fields.

Division is a log-domain subtraction (log2(1+m) ~ m); multiplication adds
exponents and mantissas plus one narrow fixed-point mantissa product.
"""

from __future__ import annotations

from .errors import ContractViolationError, InvalidInputError
from .numeric import FixedPoint, FloatFields


def _check_operands(a: FloatFields, b: FloatFields) -> int:
    if not (a.positive and b.positive):
        raise InvalidInputError("div/mul unit operands must be positive and nonzero")
    if a.mant_bits != b.mant_bits:
        raise ContractViolationError("operands use different mantissa widths")
    return a.mant_bits


def log_domain_exponent(a: FloatFields, b: FloatFields) -> FixedPoint:
    """E = e_a - e_b + m_a - m_b, exact with L fraction bits."""
    L = _check_operands(a, b)
    raw = ((a.exponent - b.exponent) << L) + a.mant - b.mant
    int_bits = (abs(raw) >> L).bit_length() + 1
    return FixedPoint(raw, L, int_bits)


def hybrid_div(a: FloatFields, b: FloatFields) -> FloatFields:
    E = log_domain_exponent(a, b)
    L = E.frac_bits
    return FloatFields(0, E.raw >> L, E.raw & ((1 << L) - 1), L)


def renormalize(e: int, x: FixedPoint) -> FloatFields:
    """Fold a mantissa sum x in [0, 3) back into 2^e' * (1 + m')."""
    L = x.frac_bits
    one = 1 << L
    if not 0 <= x.raw < 3 * one:
        raise ContractViolationError(f"mantissa sum {x.value} outside [0, 3)")
    if x.raw < one:
        return FloatFields(0, e, x.raw, L)
    return FloatFields(0, e + 1, (x.raw - one) >> 1, L)


def hybrid_mul(a: FloatFields, b: FloatFields, halfmul_bits: int | None = None) -> FloatFields:
    """a * b as 2^(e_a+e_b) * (1 + m_a + m_b + m_a*m_b').

    m_b' keeps only the top ``halfmul_bits`` fraction bits of b's mantissa
    (default L // 2).  Operand order matters: b is the truncated one.
    """
    L = _check_operands(a, b)
    h = L // 2 if halfmul_bits is None else halfmul_bits
    if not 0 <= h <= L:
        raise ContractViolationError(f"halfmul_bits={h} outside [0, {L}]")
    mb_top = (b.mant >> (L - h)) << (L - h)
    prod = (a.mant * mb_top) >> L
    x = FixedPoint(a.mant + b.mant + prod, L, 2)
    return renormalize(a.exponent + b.exponent, x)
