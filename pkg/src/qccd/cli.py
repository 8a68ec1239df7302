"""Command-line entry point: ``qccd {gen,compile,sim,sweep}``.

Exit status is 0 on success, 1 on user error (bad flags, unreadable or
malformed input, circuits that do not fit) and 2 when an internal invariant
fails (a compiled program that does not validate or simulate).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .bench import BenchSpec, Family, gen
from .compiler import CompileError, compile_circuit, validate
from .device import DeviceError, HardwareConfig, Reorder, load_hardware
from .ir import CircuitError, emit_json, emit_qasm, load_circuit
from .models import GateImpl
from .program import CompiledProgram
from .sim import SimulationError, emit_trace, simulate
from .sweep import SweepError, SweepSpec, run_sweep, to_csv, workers


class UserError(Exception):
    pass


class InternalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _hardware(args) -> HardwareConfig:
    if not args.device:
        raise UserError("--device is required")
    return load_hardware(args.device, gate=args.gate, reorder=args.reorder, capacity=args.capacity)


def _compile(args):
    if not args.circuit:
        raise UserError("--circuit is required")
    c = load_circuit(args.circuit)
    hw = _hardware(args)
    prog = compile_circuit(c, hw)
    report = validate(prog, hw, c)
    if not report:
        raise InternalError(f"compiler produced an invalid program: {report.message}")
    return c, hw, prog


def cmd_gen(args) -> None:
    spec = BenchSpec(args.family, args.n, secret=args.secret, layers=args.layers, depth=args.depth, seed=args.seed)
    c = gen(spec)
    _write(args.output, emit_json(c) if args.format == "json" else emit_qasm(c))


def cmd_compile(args) -> None:
    _, _, prog = _compile(args)
    _write(args.output, prog.to_json())


def cmd_sim(args) -> None:
    if args.program:
        if args.circuit:
            raise UserError("--program and --circuit are mutually exclusive")
        hw = _hardware(args)
        with open(args.program, encoding="utf-8") as fh:
            try:
                prog = CompiledProgram.from_json(fh.read())
            except (ValueError, KeyError, TypeError) as exc:
                raise UserError(f"{args.program}: malformed program: {exc!r}") from None
        report = validate(prog, hw)
        if not report:
            raise UserError(f"{args.program}: invalid program: {report.message}")
    else:
        _, hw, prog = _compile(args)
    try:
        metrics = simulate(prog, hw)
        if args.trace:
            _write(args.trace, emit_trace(prog, hw))
    except SimulationError as exc:
        raise InternalError(str(exc)) from None
    _write(args.output, metrics.to_json())


def cmd_sweep(args) -> None:
    if not args.sweep:
        raise UserError("--sweep is required")
    spec = SweepSpec.load(args.sweep)
    pts = spec.points()
    n = workers()
    print(f"sweep: {len(pts)} points, {min(n, len(pts))} workers", file=sys.stderr)
    rows = run_sweep(spec, n)
    failed = sum(bool(r["error"]) for r in rows)
    if failed:
        print(f"sweep: {failed} points failed (see the error column)", file=sys.stderr)
    _write(args.output or spec.output, to_csv(rows))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qccd", description="QCCD trapped-ion compiler and simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a benchmark circuit")
    g.add_argument("family", choices=[f.value for f in Family])
    g.add_argument("n", type=int)
    g.add_argument("--secret")
    g.add_argument("--layers", type=int, default=1)
    g.add_argument("--depth", type=int, default=0)
    g.add_argument("--seed", type=int)
    g.add_argument("--format", choices=["qasm", "json"], default="qasm")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    for name, func, help_ in (
        ("compile", cmd_compile, "compile a circuit to QCCD instructions"),
        ("sim", cmd_sim, "compile and simulate, printing run metrics"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--circuit", help="OpenQASM or .json circuit")
        s.add_argument("--device", help="device config JSON")
        s.add_argument("--gate", choices=[x.value for x in GateImpl])
        s.add_argument("--reorder", choices=[x.value for x in Reorder])
        s.add_argument("--capacity", type=int)
        s.add_argument("-o", "--output")
        if name == "sim":
            s.add_argument("--program", help="simulate a compiled program instead of a circuit")
            s.add_argument("--trace", help="write a per-instruction CSV trace")
        s.set_defaults(func=func)

    w = sub.add_parser("sweep", help="run a design-space sweep to CSV")
    w.add_argument("--sweep", help="sweep spec JSON")
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InternalError as exc:
        print(f"qccd: internal error: {exc}", file=sys.stderr)
        return 2
    except (UserError, CircuitError, DeviceError, CompileError, SweepError, OSError, ValueError) as exc:
        if isinstance(exc, CompileError) and "internal:" in str(exc):
            print(f"qccd: internal error: {exc}", file=sys.stderr)
            return 2
        print(f"qccd: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

