"""Forward softmax and backward Jacobian built from the hybrid units."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .divmul import hybrid_div, hybrid_mul
from .errors import InvalidInputError
from .forward import (
    ExpOut,
    HyftConfig,
    PreprocessedInput,
    adder_tree_sum,
    hybrid_exp,
    preprocess,
    subtract_max,
)
from .numeric import FixedPoint, FloatFields, encode_float, float_to_fields, fp2fx


@dataclass(frozen=True)
class ForwardTrace:
    pre: PreprocessedInput
    z_shifted: list[FixedPoint]
    exps: ExpOut
    total: Optional[FloatFields]


@dataclass(frozen=True)
class SoftmaxResult:
    s: list[FloatFields]
    cfg: HyftConfig
    trace: Optional[ForwardTrace] = None

    @property
    def values(self) -> np.ndarray:
        return np.array([f.value for f in self.s], dtype=np.float64)

    def words(self) -> list[int]:
        """Outputs packed in the I/O format; results below the normal range flush to 0."""
        return [encode_float(f, self.cfg.mode) for f in self.s]

    def __len__(self):
        return len(self.s)


@dataclass(frozen=True)
class Jacobian:
    J: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.J if dtype is None else self.J.astype(dtype)


def softmax_forward(z: Sequence[float], cfg: HyftConfig, keep_trace: bool = False) -> SoftmaxResult:
    if len(z) == 0:
        raise InvalidInputError("softmax of an empty vector")
    pre = preprocess(z, cfg)
    shifted = [subtract_max(x, pre.z_max) for x in pre.z_fixed]
    exps = [hybrid_exp(zp, cfg) for zp in shifted]
    if len(exps) == 1:
        s = [FloatFields(0, 0, 0, cfg.mode.mantissa_bits)]
        total = None
    else:
        total = adder_tree_sum(exps, cfg)
        s = [hybrid_div(e, total) for e in exps]
    trace = ForwardTrace(pre, shifted, ExpOut(exps), total) if keep_trace else None
    return SoftmaxResult(s, cfg, trace)


def _as_fields(s, cfg: HyftConfig) -> list[FloatFields]:
    if isinstance(s, SoftmaxResult):
        return list(s.s)
    out = []
    for x in s:
        out.append(x if isinstance(x, FloatFields) else float_to_fields(float(x), cfg.mode))
    return out


def softmax_backward(s, cfg: HyftConfig) -> Jacobian:
    """diag(s) - s s^T on the shared multiplier.

    Off-diagonals use the lower-index element as the first (full-width) operand
    so the matrix is exactly symmetric.  Diagonals subtract in fixed point.
    """
    fields = _as_fields(s, cfg)
    n = len(fields)
    F = cfg.precision
    J = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        si = fields[i]
        if not si.positive:
            raise InvalidInputError("softmax outputs must be positive")
        sq = hybrid_mul(si, si, cfg.halfmul_bits)
        J[i, i] = FixedPoint(fp2fx(si, F, 1).raw - fp2fx(sq, F, 1).raw, F, 1).value
        for j in range(i + 1, n):
            v = -hybrid_mul(si, fields[j], cfg.halfmul_bits).value
            J[i, j] = v
            J[j, i] = v
    return Jacobian(J)


def apply_jacobian(s, g: Sequence[float], cfg: HyftConfig) -> np.ndarray:
    """J @ g with operands floored to ``precision`` bits and exact accumulation."""
    fields = _as_fields(s, cfg)
    if len(g) != len(fields):
        raise InvalidInputError(f"gradient length {len(g)} != softmax length {len(fields)}")
    F = cfg.precision
    J = softmax_backward(fields, cfg).J
    g_int_bits = cfg.mode.max_exponent + 1
    g_raw = [fp2fx(float_to_fields(float(x), cfg.mode), F, g_int_bits).raw for x in g]
    out = np.empty(len(fields), dtype=np.float64)
    for i in range(len(fields)):
        acc = 0
        for j, gj in enumerate(g_raw):
            acc += FixedPoint.from_value(J[i, j], F, 1).raw * gj
        out[i] = (acc >> F) / (1 << F)
    return out


def batch_forward(Z, cfg: HyftConfig) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] < 1:
        raise InvalidInputError("batch input must be a non-empty M x N matrix")
    return np.vstack([softmax_forward(row, cfg).values for row in Z])
