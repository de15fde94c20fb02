"""Bit-accurate emulator of a hybrid fixed/floating-point softmax accelerator."""

from .divmul import hybrid_div, hybrid_mul, renormalize
from .engine import (
    Jacobian,
    SoftmaxResult,
    apply_jacobian,
    batch_forward,
    softmax_backward,
    softmax_forward,
)
from .errors import (
    ContractViolationError,
    FloatOverflowError,
    HyftError,
    InternalOverflowError,
    InvalidInputError,
)
from .forward import HyftConfig, adder_tree_sum, hybrid_exp, preprocess, strided_max
from .numeric import FixedPoint, FloatFields, FloatMode, decode_float, encode_float, fp2fx
from .pipeline import PipelineConfig, PipelineTrace, fom, simulate_pipeline

__version__ = "0.1.0"
