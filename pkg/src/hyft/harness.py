"""High-precision reference softmax, error metrics and reproducible inputs."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import InvalidInputError

REPORT_SCHEMA_VERSION = 1
REFERENCE_DPS = 34
REL_FLOOR = 1e-30


@dataclass
class ErrorStats:
    max_abs: float
    max_rel: float
    mean_abs: float
    sum_dev: float
    argmax_match: bool
    per_element: Optional[list[float]] = None

    def to_dict(self) -> dict:
        d = {
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "mean_abs": self.mean_abs,
            "sum_dev": self.sum_dev,
            "argmax_match": self.argmax_match,
        }
        if self.per_element is not None:
            d["per_element"] = self.per_element
        return d


@dataclass(frozen=True)
class RunSpec:
    """Where inputs come from.  With no ``input_path`` they are drawn from
    normal(mean, stddev) using numpy's PCG64 generator seeded with ``seed``."""

    mode: str = "fp16"
    precision: Optional[int] = None
    step: int = 1
    input_path: Optional[str] = None
    mean: float = 0.0
    stddev: float = 1.0
    length: int = 8
    count: int = 1
    seed: int = 0
    output_path: Optional[str] = None
    report_format: str = "json"


def reference_softmax_mp(z: Sequence, dps: int = REFERENCE_DPS) -> list:
    """Max-subtracted softmax in mpmath at ``dps`` decimal digits."""
    with mpmath.workdps(dps):
        zs = [mpmath.mpf(x) for x in z]
        zmax = max(zs)
        exps = [mpmath.exp(x - zmax) for x in zs]
        total = mpmath.fsum(exps)
        return [e / total for e in exps]


def reference_softmax(z: Sequence, dps: int = REFERENCE_DPS) -> np.ndarray:
    return np.array([float(x) for x in reference_softmax_mp(z, dps)], dtype=np.float64)


def reference_jacobian_mp(s: Sequence, dps: int = REFERENCE_DPS) -> list[list]:
    with mpmath.workdps(dps):
        s = [mpmath.mpf(x) for x in s]
        n = len(s)
        return [[(s[i] if i == j else 0) - s[i] * s[j] for j in range(n)] for i in range(n)]


def reference_jacobian(s: Sequence, dps: int = REFERENCE_DPS) -> np.ndarray:
    rows = reference_jacobian_mp(s, dps)
    return np.array([[float(x) for x in row] for row in rows], dtype=np.float64)


def finite_difference_jacobian(z: Sequence, h: float = 1e-6, dps: int = 50) -> list[list]:
    """Central differences of the reference softmax, J[i][j] = ds_i / dz_j."""
    n = len(z)
    with mpmath.workdps(dps):
        z = [mpmath.mpf(x) for x in z]
        h = mpmath.mpf(h)
        cols = []
        for j in range(n):
            up = list(z)
            dn = list(z)
            up[j] += h
            dn[j] -= h
            sp = reference_softmax_mp(up, dps)
            sm = reference_softmax_mp(dn, dps)
            cols.append([(a - b) / (2 * h) for a, b in zip(sp, sm)])
        return [[cols[j][i] for j in range(n)] for i in range(n)]


def error_report(hybrid: Sequence[float], reference: Sequence[float], per_element: bool = False) -> ErrorStats:
    h = np.asarray(hybrid, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    if h.shape != r.shape or h.ndim != 1 or h.size == 0:
        raise InvalidInputError(f"length mismatch: {h.shape} vs {r.shape}")
    abs_err = np.abs(h - r)
    rel_err = abs_err / np.maximum(np.abs(r), REL_FLOOR)
    return ErrorStats(
        max_abs=float(abs_err.max()),
        max_rel=float(rel_err.max()),
        mean_abs=float(abs_err.mean()),
        sum_dev=float(abs(h.sum() - 1.0)),
        # np.argmax returns the first maximum, matching the comparator tie rule
        argmax_match=bool(np.argmax(h) == np.argmax(r)),
        per_element=rel_err.tolist() if per_element else None,
    )


def parse_dist(text: str) -> tuple[float, float]:
    """Parse ``normal:mu,sigma``."""
    kind, _, params = text.partition(":")
    if kind != "normal":
        raise InvalidInputError(f"unsupported distribution {kind!r}")
    try:
        mu, sigma = (float(p) for p in params.split(","))
    except ValueError:
        raise InvalidInputError(f"expected normal:mu,sigma, got {text!r}") from None
    return mu, sigma


def generate_inputs(spec: RunSpec) -> np.ndarray:
    if spec.stddev < 0 or not np.isfinite(spec.stddev) or not np.isfinite(spec.mean):
        raise InvalidInputError("distribution needs a finite mean and stddev >= 0")
    if spec.length < 1 or spec.count < 1:
        raise InvalidInputError("length and count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return rng.normal(spec.mean, spec.stddev, size=(spec.count, spec.length))


def matrix_checksum(Z: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(Z, dtype="<f8").tobytes()).hexdigest()


def _parse_vectors(text: str) -> list[list[float]]:
    stripped = text.strip()
    if not stripped:
        raise InvalidInputError("no input vectors")
    if stripped[0] in "[{":
        data = json.loads(stripped)
        if isinstance(data, dict):
            data = data.get("vectors", data.get("inputs"))
        if not isinstance(data, list) or not data:
            raise InvalidInputError("JSON input must be a list of vectors")
        if all(isinstance(x, (int, float)) for x in data):
            data = [data]
    else:
        data = [row for row in csv.reader(io.StringIO(stripped)) if row]
    try:
        vectors = [[float(x) for x in row] for row in data]
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed input: {exc}") from None
    if any(len(v) == 0 for v in vectors):
        raise InvalidInputError("empty input vector")
    return vectors


def load_vectors(source: str) -> list[list[float]]:
    """Read vectors from a CSV/JSON file, or stdin when ``source`` is ``-``."""
    if source == "-":
        return _parse_vectors(sys.stdin.read())
    try:
        return _parse_vectors(Path(source).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read {source}: {exc}") from None
