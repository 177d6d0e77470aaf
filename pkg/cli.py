from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from spincoding.config.settings import get_settings
from spincoding.physics.dense_coding import capacity
from spincoding.physics.swap import cnot_from_sqrt_swap, evolve, find_swap_times, purity_witness, verify_swap
from spincoding.schemas.params import ModelParams, ProductState
from spincoding.services.config_parser import load_sweep_config
from spincoding.services.selftest import SelfTestService
from spincoding.services.sweep_service import SweepService
from spincoding.utilities.errors import SpinCodingError, UsageError
from spincoding.utilities.formatting import format_bool, format_complex, format_float
from spincoding.utilities.logging import setup_logging


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message, {"usage": self.format_usage().strip()})


def _complex(raw: str) -> complex:
    try:
        return complex(raw.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {raw!r}") from exc


def _add_model_flags(parser: argparse.ArgumentParser, with_temperature: bool) -> None:
    parser.add_argument("--J", type=float, required=True, help="Exchange coupling (J > 0 AFM, J < 0 FM).")
    parser.add_argument("--beta0", type=float, default=0.0, help="DM coupling strength.")
    parser.add_argument("--dbzeff", type=float, default=0.0, help="Effective nuclear field 2 gamma_e dBz.")
    parser.add_argument("--Bz", type=float, default=0.0, help="Mean field along z.")
    parser.add_argument("--gamma-e", dest="gamma_e", type=float, default=1.0, help="Electron gyromagnetic factor.")
    if with_temperature:
        parser.add_argument("--T", type=float, required=True, help="Temperature (k_B = 1).")


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kmax", type=int, default=None, help="Largest k to enumerate.")
    parser.add_argument("--nmax", type=int, default=None, help="Largest |n| to enumerate.")
    parser.add_argument("--tol", type=float, default=None, help="Residual tolerance on the time conditions.")


def _parse_args(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    parser = _ArgumentParser(prog="cli.py", description="Dense coding and swap dynamics of two coupled spins")
    parser.add_argument("--precision", type=int, default=12, help="Significant digits in printed numbers.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    cap = commands.add_parser("capacity", help="Dense-coding capacity of the thermal state.")
    _add_model_flags(cap, with_temperature=True)

    evo = commands.add_parser("evolve", help="Evolve a product state and print the purity witness.")
    _add_model_flags(evo, with_temperature=False)
    evo.add_argument("--t", type=float, required=True, help="Evolution time.")
    for name, default in (("alpha1", "1"), ("beta1", "0"), ("alpha2", "1"), ("beta2", "0")):
        evo.add_argument(f"--{name}", type=_complex, default=complex(default), help="Amplitude, e.g. 0.6+0.8j.")

    find = commands.add_parser("swap-find", help="List swap times for integer (k, n).")
    _add_model_flags(find, with_temperature=False)
    _add_solver_flags(find)

    check = commands.add_parser("swap-verify", help="Verify one swap-find solution on random product states.")
    _add_model_flags(check, with_temperature=False)
    _add_solver_flags(check)
    check.add_argument("--index", type=int, required=True, help="Row index printed by swap-find.")
    check.add_argument("--seed", type=int, default=None, help="Seed for the random product states.")
    check.add_argument("--batch", type=int, default=None, help="Number of random product states.")

    sweep = commands.add_parser("sweep", help="Evaluate a quantity on a parameter grid and write CSV.")
    sweep.add_argument("--config", type=Path, required=True, help="Sweep config file (key = value).")
    sweep.add_argument("--workers", type=int, default=None, help="Parallel worker processes.")
    sweep.add_argument("--output", type=Path, default=None, help="Override the config's output path.")

    selftest = commands.add_parser("selftest", help="Run the oracle cross-check suite.")
    selftest.add_argument("--quick", action="store_true", help="Smaller random batches.")

    commands.add_parser("gate", help="Compare the sqrt-swap gate sequence with CNOT.")

    args = parser.parse_args(argv)
    if not 1 <= args.precision <= 17:
        raise UsageError("--precision must be between 1 and 17.", {"precision": args.precision})
    return args


def _model(args: argparse.Namespace) -> ModelParams:
    return ModelParams.from_effective(
        J=args.J,
        beta0=args.beta0,
        dBzeff=args.dbzeff,
        Bz=args.Bz,
        T=getattr(args, "T", None),
        gamma_e=args.gamma_e,
    )


def _emit(values: Dict[str, Any], precision: int) -> None:
    for key, value in values.items():
        if value is None:
            text = ""
        elif isinstance(value, bool):
            text = format_bool(value)
        elif isinstance(value, complex):
            text = format_complex(value, precision)
        elif isinstance(value, float):
            text = format_float(value, precision)
        else:
            text = str(getattr(value, "value", value))
        print(f"{key}={text}")


def _capacity(args: argparse.Namespace) -> int:
    report = capacity(_model(args))
    _emit(report.model_dump(), args.precision)
    return 0


def _evolve(args: argparse.Namespace) -> int:
    p = _model(args)
    try:
        s0 = ProductState.from_unnormalised(args.alpha1, args.beta1, args.alpha2, args.beta2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    e = evolve(p, s0, args.t)
    w = purity_witness(p, s0, args.t)
    _emit(
        {
            "a": e.a,
            "b": e.b,
            "c": e.c,
            "d": e.d,
            "witness": w.value,
            "witness_squared": w.squared,
            "witness_closed_form": w.closed_form,
            "mu": w.mu,
            "nu": w.nu,
            "X": w.X,
            "Y": w.Y,
            "oracle_path": e.oracle_path,
        },
        args.precision,
    )
    return 0


def _solutions(args: argparse.Namespace):
    return find_swap_times(_model(args), args.kmax, args.nmax, args.tol)


def _swap_find(args: argparse.Namespace) -> int:
    columns = [
        "index",
        "case",
        "k",
        "n",
        "t",
        "mapping",
        "phase_spin1",
        "phase_spin2",
        "printed_phase",
        "residual",
        "correction_spin1",
        "correction_spin2",
    ]
    print(",".join(columns))
    for index, sol in enumerate(_solutions(args)):
        cells: List[str] = [
            str(index),
            sol.case_label.value,
            str(sol.k),
            str(sol.n),
            format_float(sol.t, args.precision),
            sol.mapping.value,
        ]
        for phase in (sol.phase_spin1, sol.phase_spin2, sol.printed_phase):
            cells.append("" if phase is None else format_float(phase, args.precision))
        cells.append(format_float(max(sol.residuals.values()), args.precision))
        for correction in sol.phase_correction:
            cells.append("" if correction is None else format_float(correction, args.precision))
        print(",".join(cells))
    return 0


def _swap_verify(args: argparse.Namespace) -> int:
    solutions = _solutions(args)
    if not 0 <= args.index < len(solutions):
        raise UsageError(
            f"Solution index {args.index} out of range.", {"solutions": len(solutions)}
        )
    report = verify_swap(_model(args), solutions[args.index], batch=args.batch, seed=args.seed)
    _emit(report.model_dump(), args.precision)
    return 0 if report.valid else 2


def _sweep(args: argparse.Namespace) -> int:
    cfg = load_sweep_config(args.config)
    if args.output is not None:
        cfg = cfg.model_copy(update={"output_path": args.output})
    _, text = SweepService(get_settings()).run_sweep(cfg, workers=args.workers)
    if cfg.output_path is None:
        sys.stdout.write(text)
    return 0


def _selftest(args: argparse.Namespace) -> int:
    results = SelfTestService(get_settings(), quick=args.quick).run()
    for result in results:
        print(f"{'PASS' if result.passed else 'FAIL'} {result.name}: {result.detail}")
    return 0 if all(result.passed for result in results) else 2


def _gate(args: argparse.Namespace) -> int:
    _, report = cnot_from_sqrt_swap()
    _emit(report.model_dump(), args.precision)
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "capacity": _capacity,
    "evolve": _evolve,
    "swap-find": _swap_find,
    "swap-verify": _swap_verify,
    "sweep": _sweep,
    "selftest": _selftest,
    "gate": _gate,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    logger = setup_logging()
    try:
        args = _parse_args(argv)
        return COMMANDS[args.command](args)
    except SpinCodingError as exc:
        logger.error("%s %s: %s | details=%s", type(exc).__name__, exc.code, exc.message, exc.details)
        print(f"[{exc.code}] {exc.message}", file=sys.stderr)
        usage = exc.details.get("usage") if isinstance(exc, UsageError) else None
        if usage:
            print(usage, file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        reasons = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or 'input'}: {error['msg']}" for error in exc.errors()
        )
        logger.error("Invalid input: %s", reasons)
        print(f"[{UsageError.code}] Invalid input: {reasons}", file=sys.stderr)
        return UsageError.exit_code


if __name__ == "__main__":
    raise SystemExit(run_cli())
