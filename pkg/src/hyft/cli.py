"""``hyft`` command line: forward, backward, sweep, pipeline and fom subcommands.

Exit status is 0 on success, 2 on validation errors and 3 when a
fixed-point accumulator overflows.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

import numpy as np

from .engine import softmax_backward, softmax_forward
from .errors import HyftError, InternalOverflowError, InvalidInputError
from .forward import HyftConfig
from .harness import (
    REPORT_SCHEMA_VERSION,
    RunSpec,
    error_report,
    generate_inputs,
    load_vectors,
    parse_dist,
    reference_jacobian,
    reference_softmax,
)
from .numeric import FloatMode, floats_to_fields
from .pipeline import PipelineConfig, closed_form_total, fom, simulate_pipeline

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_OVERFLOW = 3

SWEEP_COLUMNS = (
    "mode",
    "precision",
    "step",
    "vectors",
    "len",
    "max_abs",
    "max_rel",
    "mean_abs",
    "max_sum_dev",
    "argmax_match_rate",
)


def parse_range(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise InvalidInputError(f"expected a..b, got {text!r}") from None
    if b < a:
        raise InvalidInputError(f"empty range {text!r}")
    return list(range(a, b + 1))


def _rounded(z: Sequence[float], mode: FloatMode) -> list[float]:
    # the oracle sees exactly the values the emulator ingests
    return [f.value for f in floats_to_fields(z, mode)]


def _config(args) -> HyftConfig:
    return HyftConfig(
        mode=FloatMode.parse(args.mode),
        precision=args.precision,
        step=args.step,
        accum_int_bits=args.accum_int_bits,
        halfmul_bits=args.halfmul_bits,
    )


def _header(command: str, cfg: HyftConfig) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": command,
        "mode": cfg.mode.value,
        "precision": cfg.precision,
        "step": cfg.step,
        "halfmul_bits": cfg.halfmul_bits,
    }


def cmd_forward(args) -> str:
    cfg = _config(args)
    report = _header("forward", cfg)
    rows = []
    for z in load_vectors(args.input):
        result = softmax_forward(z, cfg)
        ref = reference_softmax(_rounded(z, cfg.mode))
        stats = error_report(result.values, ref, per_element=args.per_element)
        rows.append(
            {
                "outputs": result.values.tolist(),
                "words": [f"0x{w:0{cfg.mode.width // 4}x}" for w in result.words()],
                "reference": ref.tolist(),
                "stats": stats.to_dict(),
            }
        )
    report["vectors"] = rows
    return json.dumps(report, indent=2) + "\n"


def cmd_backward(args) -> str:
    cfg = _config(args)
    report = _header("backward", cfg)
    rows = []
    for z in load_vectors(args.input):
        result = softmax_forward(z, cfg)
        J = softmax_backward(result, cfg).J
        J_ref = reference_jacobian(reference_softmax(_rounded(z, cfg.mode)))
        stats = error_report(J.ravel(), J_ref.ravel(), per_element=args.per_element)
        rows.append(
            {
                "outputs": result.values.tolist(),
                "jacobian": J.tolist(),
                "reference": J_ref.tolist(),
                "stats": stats.to_dict(),
            }
        )
    report["vectors"] = rows
    return json.dumps(report, indent=2) + "\n"


def sweep_rows(mode: FloatMode, precisions, steps, Z: np.ndarray) -> list[dict]:
    refs = [reference_softmax(_rounded(z, mode)) for z in Z]
    rows = []
    for F in precisions:
        for step in steps:
            cfg = HyftConfig(mode=mode, precision=F, step=step)
            stats = [error_report(softmax_forward(z, cfg).values, r) for z, r in zip(Z, refs)]
            rows.append(
                {
                    "mode": mode.value,
                    "precision": F,
                    "step": step,
                    "vectors": Z.shape[0],
                    "len": Z.shape[1],
                    "max_abs": max(s.max_abs for s in stats),
                    "max_rel": max(s.max_rel for s in stats),
                    "mean_abs": float(np.mean([s.mean_abs for s in stats])),
                    "max_sum_dev": max(s.sum_dev for s in stats),
                    "argmax_match_rate": sum(s.argmax_match for s in stats) / len(stats),
                }
            )
    return rows


def cmd_sweep(args) -> str:
    mode = FloatMode.parse(args.mode)
    mu, sigma = parse_dist(args.dist)
    spec = RunSpec(
        mode=mode.value, mean=mu, stddev=sigma, length=args.len, count=args.vectors, seed=args.seed
    )
    rows = sweep_rows(mode, parse_range(args.precision_range), parse_range(args.step_range), generate_inputs(spec))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def cmd_pipeline(args) -> str:
    try:
        stages = tuple(int(c) for c in args.stages.split(","))
    except ValueError:
        raise InvalidInputError(f"expected c1,c2,c3, got {args.stages!r}") from None
    cfg = PipelineConfig(stages, num_vectors=args.vectors, vector_len=args.len, layers=args.layers)
    trace = simulate_pipeline(cfg)
    expected = closed_form_total(cfg)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "pipeline",
        "stage_cycles": list(cfg.stage_cycles),
        "num_vectors": cfg.num_vectors,
        "trace": trace.to_dict(),
        "closed_form_total": expected,
        "closed_form_match": trace.total_cycles == expected,
    }
    return json.dumps(report, indent=2) + "\n"


def cmd_fom(args) -> str:
    return f"{fom(args.fmax, args.n, args.w, args.lut, args.ff)!r}\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyft", description="Hybrid fixed/floating-point softmax emulator")
    parser.add_argument("-o", "--output", help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("forward", cmd_forward), ("backward", cmd_backward)):
        p = sub.add_parser(name)
        p.add_argument("--mode", choices=["fp16", "fp32"], default="fp16")
        p.add_argument("--precision", type=int, default=None)
        p.add_argument("--step", type=int, default=1)
        p.add_argument("--input", required=True, help="CSV or JSON file, or - for stdin")
        p.add_argument("--accum-int-bits", type=int, default=None, help="adder-tree integer bits")
        p.add_argument("--halfmul-bits", type=int, default=None, help="kept bits of the truncated multiplicand")
        p.add_argument("--per-element", action="store_true", help="include per-element relative errors")
        p.set_defaults(func=fn)

    p = sub.add_parser("sweep")
    p.add_argument("--mode", choices=["fp16", "fp32"], default="fp16")
    p.add_argument("--precision-range", default="10..10")
    p.add_argument("--step-range", default="1..1")
    p.add_argument("--vectors", type=int, default=100)
    p.add_argument("--len", type=int, default=8)
    p.add_argument("--dist", default="normal:0,2")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline")
    p.add_argument("--stages", default="2,4,2")
    p.add_argument("--vectors", type=int, default=1)
    p.add_argument("--len", type=int, default=8)
    p.add_argument("--layers", type=int, default=2)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("fom")
    p.add_argument("--fmax", type=float, required=True, help="MHz")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--lut", type=int, required=True)
    p.add_argument("--ff", type=int, required=True)
    p.set_defaults(func=cmd_fom)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except InternalOverflowError as exc:
        print(f"hyft: internal overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (HyftError, ValueError) as exc:
        print(f"hyft: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
