"""Command-line front end: simulate, sweep, and design subcommands.

``simulate`` and ``sweep`` consume a JSON config document and write
CSV/JSON artifacts into an output directory (given by ``--out`` or the
config's ``output_dir``). ``design`` searches for the smallest Pauli
groups that average a given interaction away and prints them with their
pulse programs.

Exit codes: 0 success; 1 the configured group fails to decouple the
interaction (residual table printed); 2 bad usage or config.
"""

from __future__ import annotations

import argparse
import itertools
import sys

import numpy as np

from .groups import (
    PAULI_LETTERS,
    commutant_basis,
    minimal_group_search,
    pauli_word_operator,
)
from .operators import Operator
from .sequence import boundary_pulses, schedule_from_group
from .scenarios import ConfigError, load_config, run_scenario, run_sweep


def _pulse_label(pulse: Operator, n_qubits: int) -> str:
    """Name a pulse by the Pauli word it is proportional to, if any."""
    d = pulse.dim
    for word in itertools.product(PAULI_LETTERS, repeat=n_qubits):
        w = "".join(word)
        overlap = np.trace(pauli_word_operator(w).matrix.conj().T @ pulse.matrix) / d
        if abs(abs(overlap) - 1.0) <= 1e-9:
            return w
    return "(non-Pauli)"


def _design(args) -> int:
    words = [w.upper() for w in args.interaction]
    for w in words:
        if len(w) != args.qubits or any(c not in PAULI_LETTERS for c in w):
            print(
                f"error: {w!r} is not a {args.qubits}-letter Pauli word",
                file=sys.stderr,
            )
            return 2
    interaction = [pauli_word_operator(w) for w in words]
    try:
        groups = minimal_group_search(interaction, args.qubits, max_order=args.max_order)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(f"interaction span: {words} on {args.qubits} qubit(s)")
    if not groups:
        print(f"no decoupling group of order <= {args.max_order} exists for this interaction")
        return 1
    print(f"minimal decoupling groups (order {groups[0].order}):")
    for group in groups:
        cdim = commutant_basis(group).dimension
        mode = "maximal" if cdim == 1 else "selective"
        print(f"  group {list(group.labels)}  [{mode}, commutant dimension {cdim}]")
        pulses = boundary_pulses(schedule_from_group(group, delta_t=1.0))
        program: list[str] = []
        for pulse in pulses:
            program.append("dt")
            program.append(_pulse_label(pulse, args.qubits))
        print(f"    cycle (pulses up to phase): {' '.join(program)}")
    return 0


def _resolve_out(args, config) -> str:
    if args.out is not None:
        return args.out
    if config.output_dir is not None:
        return config.output_dir
    raise ConfigError("no output directory: pass --out or set output_dir in the config")


def _simulate(args) -> int:
    config = load_config(args.config)
    return run_scenario(config, _resolve_out(args, config))


def _sweep(args) -> int:
    config = load_config(args.config)
    if config.sweep_values is None:
        raise ConfigError("config field 'sweep': required for the sweep command")
    return run_sweep(config, _resolve_out(args, config))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="decoupling",
        description="Bang-bang decoupling simulations: suppress decoherence "
        "by cycling a qubit register through a finite group of control frames.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one controlled-vs-free comparison")
    p_sim.add_argument("--config", required=True, help="path to a JSON config document")
    p_sim.add_argument("--out", help="output directory (default: config output_dir)")

    p_sweep = sub.add_parser("sweep", help="sweep delta_t at fixed total time and fit the scaling")
    p_sweep.add_argument("--config", required=True, help="path to a JSON config document")
    p_sweep.add_argument("--out", help="output directory (default: config output_dir)")

    p_design = sub.add_parser("design", help="search for minimal decoupling groups")
    p_design.add_argument(
        "--interaction", nargs="+", required=True, metavar="WORD",
        help="Pauli words spanning the interaction, e.g. ZI IZ XX",
    )
    p_design.add_argument("--qubits", type=int, required=True, help="register size K (max 3)")
    p_design.add_argument(
        "--max-order", type=int, default=64, help="largest group order to consider"
    )

    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "sweep":
            return _sweep(args)
        return _design(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run(argv=None):
    """Console entry point."""
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
