"""Forward datapath: input pre-processor, hybrid exponent unit and hybrid adder tree."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ContractViolationError, InternalOverflowError, InvalidInputError
from .numeric import (
    FixedPoint,
    FloatFields,
    FloatMode,
    asr,
    floats_to_fields,
    fp2fx,
    fx2fp_via_lod,
)

DEFAULT_INPUT_INT_BITS = 6


@dataclass(frozen=True)
class HyftConfig:
    """Run-time parameters of one accelerator instance.

    ``precision`` defaults to the mantissa width of the mode.  ``accum_int_bits``
    left as ``None`` is sized per vector as ``1 + ceil(log2 N)``; a narrower
    explicit width raises InternalOverflowError only if a sum really overflows.
    ``halfmul_bits`` defaults to half the mantissa width.
    """

    mode: FloatMode = FloatMode.HALF
    precision: Optional[int] = None
    step: int = 1
    input_int_bits: int = DEFAULT_INPUT_INT_BITS
    accum_int_bits: Optional[int] = None
    halfmul_bits: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", FloatMode.parse(self.mode))
        if self.precision is None:
            object.__setattr__(self, "precision", self.mode.mantissa_bits)
        if self.halfmul_bits is None:
            object.__setattr__(self, "halfmul_bits", self.mode.mantissa_bits // 2)
        if self.step < 1:
            raise InvalidInputError(f"step must be >= 1, got {self.step}")
        if self.precision < 2:
            raise InvalidInputError(f"precision must be >= 2, got {self.precision}")
        if self.input_int_bits < 1:
            raise InvalidInputError("input_int_bits must be >= 1")
        if self.accum_int_bits is not None and self.accum_int_bits < 1:
            raise InvalidInputError("accum_int_bits must be >= 1")
        if not 0 <= self.halfmul_bits <= self.mode.mantissa_bits:
            raise InvalidInputError(
                f"halfmul_bits must lie in [0, {self.mode.mantissa_bits}]"
            )

    def accumulator_bits(self, n: int) -> int:
        if self.accum_int_bits is not None:
            return self.accum_int_bits
        return 1 + math.ceil(math.log2(n)) if n > 1 else 1


@dataclass(frozen=True)
class PreprocessedInput:
    z_fixed: list[FixedPoint]
    z_max: FixedPoint
    max_index: int
    saturated: bool = False


@dataclass(frozen=True)
class ExpOut:
    values: list[FloatFields] = field(default_factory=list)


def strided_max(z: Sequence, step: int = 1):
    """Max over indices 0, step, 2*step, ...; the first occurrence wins ties."""
    if len(z) == 0:
        raise InvalidInputError("max search over an empty vector")
    if step < 1:
        raise InvalidInputError(f"step must be >= 1, got {step}")
    best, best_i = z[0], 0
    for i in range(step, len(z), step):
        if z[i] > best:
            best, best_i = z[i], i
    return best, best_i


def preprocess(z: Sequence[float], cfg: HyftConfig) -> PreprocessedInput:
    F, I = cfg.precision, cfg.input_int_bits
    z_fixed = [fp2fx(f, F, I) for f in floats_to_fields(z, cfg.mode)]
    z_max, idx = strided_max(z_fixed, cfg.step)
    return PreprocessedInput(
        z_fixed, z_max, idx, saturated=any(x.saturated for x in z_fixed)
    )


def subtract_max(x: FixedPoint, z_max: FixedPoint) -> FixedPoint:
    """z' = x - z_max, clamped to 0 when a strided search missed the true max."""
    diff = min(x.raw - z_max.raw, 0)
    return FixedPoint(diff, x.frac_bits, x.int_bits + 1)


def log2e_shift_add(zp: FixedPoint) -> FixedPoint:
    """z' * log2(e) as z' + (z' >> 1) - (z' >> 4)."""
    if zp.raw > 0:
        raise ContractViolationError("exponent unit input must be <= 0")
    raw = zp.raw + asr(zp, 1).raw - asr(zp, 4).raw
    return FixedPoint(raw, zp.frac_bits, zp.int_bits + 1)


def split_int_frac(t: FixedPoint) -> tuple[int, FixedPoint]:
    """Bit split into floor integer part and a fraction in [0, 1)."""
    F = t.frac_bits
    return t.raw >> F, FixedPoint(t.raw & ((1 << F) - 1), F, 0)


def hybrid_exp(zp: FixedPoint, cfg: HyftConfig) -> FloatFields:
    """e^z' for z' <= 0, emitted directly as float fields (no shifter).

    With the floor split t = u + v, v in [0, 1), the output is 2^u * (1 + v).
    """
    u, v = split_int_frac(log2e_shift_add(zp))
    L = cfg.mode.mantissa_bits
    F = v.frac_bits
    mant = v.raw >> (F - L) if F >= L else v.raw << (L - F)
    return FloatFields(0, u, mant, L)


def _tree_reduce(terms: list[int]) -> int:
    # balanced pairwise, left to right; the sum is exact either way
    while len(terms) > 1:
        paired = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            paired.append(terms[-1])
        terms = paired
    return terms[0]


def adder_tree_sum(exps: ExpOut | Sequence[FloatFields], cfg: HyftConfig) -> FloatFields:
    values = exps.values if isinstance(exps, ExpOut) else list(exps)
    if not values:
        raise InvalidInputError("adder tree needs at least one term")
    F = cfg.precision
    terms = []
    for e in values:
        if not e.positive or e.exponent > 0:
            raise ContractViolationError("adder tree terms must lie in (0, 1]")
        terms.append(fp2fx(e, F, 1).raw)
    total = _tree_reduce(terms)
    int_bits = cfg.accumulator_bits(len(values))
    if total > FixedPoint.max_raw(F, int_bits):
        raise InternalOverflowError(
            f"adder tree sum overflows a {int_bits}-bit integer accumulator"
        )
    if total <= 0:
        raise InternalOverflowError(
            "adder tree sum truncated to zero; precision too small for these inputs"
        )
    return fx2fp_via_lod(FixedPoint(total, F, int_bits), cfg.mode)
