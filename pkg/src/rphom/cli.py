"""Command-line front end.

    rphom certify SYSTEM.json [--count-real] [--json]
    rphom binomials SYSTEM.json [--json] [--dump-cells] [--scale S]
    rphom solve SYSTEM.json [--certify] [--t-start T] [--newton-tol TOL]
                            [--max-steps N] [--seed S] [--json]
    rphom mixed-volume SYSTEM.json [--seed S] [--json]

Exit codes: 0 success/certified, 3 not certified, 4 parse or validation
error, 5 degenerate lifting, 6 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import dataclass, field
from typing import TextIO

from .binomial import generate_binomials
from .errors import (
    DegenerateLiftingError,
    DegenerateSystemError,
    DimensionError,
    RPHError,
    SystemParseError,
)
from .mixed_cells import (
    DEFAULT_SCALE,
    dual_cone_generators,
    enumerate_mixed_cells,
    integerize,
    mixed_volume,
)
from .patchwork import certify_patchwork
from .poly_core import SparseSystem, log_lifting, parse_system
from .tracking import TrackerOptions, rph_track

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 3
EXIT_INPUT = 4
EXIT_DEGENERATE = 5
EXIT_NUMERIC = 6

COMMANDS = ("certify", "binomials", "solve", "mixed-volume")

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM}

JSON_SCHEMAS = {
    "certify": {
        "type": "object",
        "required": ["certified", "margins"],
        "properties": {
            "certified": {"type": "boolean"},
            "real_root_count": {"type": "integer", "minimum": 0},
            "margins": {"type": "array", "items": {**_VEC, "minItems": 3, "maxItems": 3}},
        },
    },
    "binomials": {
        "type": "object",
        "required": ["binomials"],
        "properties": {
            "binomials": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["exponent_matrix", "rhs", "source_cell", "polynomials"],
                    "properties": {
                        "exponent_matrix": {
                            "type": "array",
                            "items": {"type": "array", "items": {"type": "integer"}},
                        },
                        "rhs": _VEC,
                        "source_cell": {"type": "integer"},
                        "polynomials": {"type": "array", "items": {"type": "string"}},
                    },
                },
            },
            "cells": {"type": "array"},
            "generators": {"type": "array"},
        },
    },
    "solve": {
        "type": "object",
        "required": ["solutions", "paths", "certified_input", "certificate_flag"],
        "properties": {
            "solutions": {"type": "array", "items": _VEC},
            "paths": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["status", "endpoint", "final_residual"],
                    "properties": {
                        "status": {
                            "enum": ["success", "diverged", "step-limit", "newton-failure"]
                        },
                        "endpoint": _VEC,
                        "final_residual": _NUM,
                    },
                },
            },
            "certified_input": {"type": "boolean"},
            "certificate_flag": {"enum": [0, 1, None]},
            "warnings": {"type": "array", "items": {"type": "string"}},
        },
    },
    "mixed-volume": {
        "type": "object",
        "required": ["mixed_volume"],
        "properties": {"mixed_volume": {"type": "integer", "minimum": 0}},
    },
}


@dataclass
class RunConfig:
    input_path: str
    command: str
    count_real: bool = False
    certify: bool = False
    json: bool = False
    seed: int | None = 0
    t_start: float = TrackerOptions.t_start
    newton_tol: float = TrackerOptions.newton_tol
    max_steps: int = TrackerOptions.max_steps
    scale: float = DEFAULT_SCALE
    dump_cells: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.count_real and self.command != "certify":
            raise ValueError("--count-real only applies to 'certify'")
        if self.certify and self.command != "solve":
            raise ValueError("--certify only applies to 'solve'")
        if self.dump_cells and self.command != "binomials":
            raise ValueError("--dump-cells only applies to 'binomials'")
        if not self.scale > 0:
            raise ValueError("--scale must be positive")


def format_vector(x) -> str:
    return "[" + ", ".join(f"{float(v):.17g}" for v in x) + "]"


def _load(path: str) -> SparseSystem:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SystemParseError(f"cannot read {path}: {exc}") from exc
    return parse_system(text)


def _cmd_certify(F, cfg, out, err):
    cert = certify_patchwork(F, count_real=cfg.count_real, scale=cfg.scale)
    if cfg.json:
        json.dump(cert.to_dict(), out)
        out.write("\n")
    elif cfg.count_real and cert.certified:
        out.write(f"(1, {cert.real_root_count})\n")
    else:
        out.write(f"{int(cert.certified)}\n")
    return EXIT_OK if cert.certified else EXIT_NOT_CERTIFIED


def _cmd_binomials(F, cfg, out, err):
    binomials = generate_binomials(F, cfg.scale)
    if cfg.json:
        doc = {"binomials": [B.to_dict() for B in binomials]}
        if cfg.dump_cells:
            w = integerize(log_lifting(F), cfg.scale)
            cells = enumerate_mixed_cells(F, w)
            doc["cells"] = [c.to_dict() for c in cells]
            doc["generators"] = [g.to_dict() for g in dual_cone_generators(F, cells, w)]
        json.dump(doc, out)
        out.write("\n")
    else:
        for B in binomials:
            out.write("[" + ", ".join(B.format()) + "]\n")
        if cfg.dump_cells:
            w = integerize(log_lifting(F), cfg.scale)
            cells = enumerate_mixed_cells(F, w)
            json.dump(
                {
                    "cells": [c.to_dict() for c in cells],
                    "generators": [g.to_dict() for g in dual_cone_generators(F, cells, w)],
                },
                out,
            )
            out.write("\n")
    return EXIT_OK


def _cmd_solve(F, cfg, out, err):
    opts = TrackerOptions(
        t_start=cfg.t_start, newton_tol=cfg.newton_tol, max_steps=cfg.max_steps
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = rph_track(F, opts, certify=cfg.certify, scale=cfg.scale)
    if not result.certified_input:
        print(
            "warning: system is not certified patchworked; results are heuristic",
            file=err,
        )
    if cfg.json:
        doc = {
            "solutions": [[float(v) for v in x] for x in result.solutions],
            "paths": [p.to_dict() for p in result.paths],
            "certified_input": result.certified_input,
            "certificate_flag": result.certificate_flag,
            "warnings": result.warnings,
        }
        json.dump(doc, out)
        out.write("\n")
    else:
        for x in result.solutions:
            out.write(format_vector(x) + "\n")
        if cfg.certify:
            out.write(f"{result.certificate_flag}\n")
    return EXIT_OK


def _cmd_mixed_volume(F, cfg, out, err):
    mv = mixed_volume(F, seed=cfg.seed)
    if cfg.json:
        json.dump({"mixed_volume": mv}, out)
        out.write("\n")
    else:
        out.write(f"{mv}\n")
    return EXIT_OK


_HANDLERS = {
    "certify": _cmd_certify,
    "binomials": _cmd_binomials,
    "solve": _cmd_solve,
    "mixed-volume": _cmd_mixed_volume,
}


def run(cfg: RunConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Execute one command; returns the process exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            F = _load(cfg.input_path)
        for w in caught:
            print(f"warning: {w.message}", file=err)
        return _HANDLERS[cfg.command](F, cfg, out, err)
    except (SystemParseError, DimensionError, DegenerateSystemError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except DegenerateLiftingError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DEGENERATE
    except (RPHError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rphom", description="Real polyhedral homotopy solver."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scale=True):
        p.add_argument("input_path", help="system file (JSON)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if scale:
            p.add_argument("--scale", type=float, default=DEFAULT_SCALE,
                           help="integer scaling of the log lifting (default 1e6)")

    p = sub.add_parser("certify", help="test the patchwork certificate")
    common(p)
    p.add_argument("--count-real", action="store_true",
                   help="also report the real root count when certified")

    p = sub.add_parser("binomials", help="print the binomial start systems")
    common(p)
    p.add_argument("--dump-cells", action="store_true",
                   help="also dump mixed cells and cone generators as JSON")

    p = sub.add_parser("solve", help="track real start roots to the system")
    common(p)
    p.add_argument("--certify", action="store_true",
                   help="Krawczyk-certify start roots and endpoints")
    p.add_argument("--t-start", type=float, default=TrackerOptions.t_start)
    p.add_argument("--newton-tol", type=float, default=TrackerOptions.newton_tol)
    p.add_argument("--max-steps", type=int, default=TrackerOptions.max_steps)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("mixed-volume", help="print the Bernstein bound")
    common(p, scale=False)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        input_path=args.input_path,
        command=args.command,
        count_real=getattr(args, "count_real", False),
        certify=getattr(args, "certify", False),
        json=args.json,
        seed=getattr(args, "seed", 0),
        t_start=getattr(args, "t_start", TrackerOptions.t_start),
        newton_tol=getattr(args, "newton_tol", TrackerOptions.newton_tol),
        max_steps=getattr(args, "max_steps", TrackerOptions.max_steps),
        scale=getattr(args, "scale", DEFAULT_SCALE),
        dump_cells=getattr(args, "dump_cells", False),
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
