#!/usr/bin/env python3
"""Command-line front end: Fig. 1, Table I and Fig. 3 tables plus the protocol simulator.

Usage:
    python cli.py fig1 --preset a
    python cli.py table1 --tau-o 0
    python cli.py fig3 --format json --output fig3.json
    python cli.py protocol --seed 7 --from-vacuum --a 60e9 --omega 40e9 --z 1e5

Every flag may also come from a KEY=VALUE file given with ``--config``
(``OMEGA_MIN=10e9`` is ``--omega-min 10e9``, ``FROM_VACUUM=true`` is
``--from-vacuum``). Flags on the command line win over the file.

Exit codes: 0 success or accepted run, 1 usage or internal error,
2 protocol abort.
"""
import argparse
import sys
from typing import List, Optional

from config import Config
from coordinator import ReproductionCoordinator, linear_grid, log_grid
from physics import QuadratureSpec
from utils import emit, frame_to_csv, frame_to_json, set_log_level, setup_logger

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ABORT = 2

_TRUE_WORDS = {'1', 'true', 'yes', 'on'}
_FALSE_WORDS = {'0', 'false', 'no', 'off', ''}
_FLAG_KEYS = {'from_vacuum'}


class UsageError(ValueError):
    """Bad command line or config file."""


class _Parser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(message)


# ============================================================
# Argument types
# ============================================================

def _count(text: str) -> int:
    """Positive integer that may be written in float notation (1e5)."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from None
    if not value.is_integer() or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return int(value)


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64), got {text}")
    return value


def _method(text: str) -> str:
    aliases = {'exact': 'exact', 'approx': 'approximate', 'approximate': 'approximate'}
    if text not in aliases:
        raise argparse.ArgumentTypeError(f"method must be exact or approx, got {text}")
    return aliases[text]


# ============================================================
# Parser
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--config', help='KEY=VALUE file with flag values')
    common.add_argument('--log-level', help='Console log level (DEBUG, INFO, WARNING, ...)')
    common.add_argument('--workers', type=_count, help='Processes for exact sweeps')
    common.add_argument('--output', '-o', help="Output file ('-' or omitted: stdout)")
    common.add_argument('--format', choices=['csv', 'json'], help='Table format (default csv)')

    parser = _Parser(
        prog='vacuum-qkd',
        description='Reproduce the detected-vacuum QKD figures and run the protocol simulator.',
    )
    sub = parser.add_subparsers(dest='command', metavar='{fig1,table1,fig3,protocol}')
    sub.required = True

    fig1 = sub.add_parser('fig1', parents=[common], help='Squeezing and purity against peak frequency')
    fig1.add_argument('--preset', choices=sorted(Config.FIG1_PRESETS), default='a',
                      help='Detector set to start from (default a)')
    fig1.add_argument('--a', type=float, help='Scaling rate, rad/s')
    fig1.add_argument('--d-width', type=float, help='Longitudinal width, rad/s')
    fig1.add_argument('--s-width', type=float, help='Transverse width, rad/s')
    fig1.add_argument('--omega-min', type=float, help='First peak frequency, rad/s')
    fig1.add_argument('--omega-max', type=float, help='Last peak frequency, rad/s')
    fig1.add_argument('--points', type=_count, help='Grid points')
    fig1.add_argument('--method', type=_method, default='exact', help='exact or approx')
    fig1.add_argument('--rel-tol', type=float, help='Quadrature relative tolerance')
    fig1.add_argument('--max-evals', type=_count, help='Quadrature evaluation budget')

    t1 = sub.add_parser('table1', parents=[common], help='Lab-frame detector parameters')
    t1.add_argument('--a', type=float, help='Scaling rate, rad/s')
    t1.add_argument('--omega', type=float, help='Peak conformal frequency, rad/s')
    t1.add_argument('--tau-o', type=float, action='append', default=[],
                    help='Extra initial conformal time, s (repeatable)')
    t1.add_argument('--delta-tau', type=float, help='Conformal detection interval, s')

    fig3 = sub.add_parser('fig3', parents=[common], help='Key rate against distance')
    fig3.add_argument('--a', type=float, help='Scaling rate of a single custom curve, rad/s')
    fig3.add_argument('--omega', type=float, help='Peak frequency of a single custom curve, rad/s')
    fig3.add_argument('--gain', type=float, help='EPR-source gain of a single custom curve')
    fig3.add_argument('--waist', type=float, help='Beam waist W, m')
    fig3.add_argument('--wavelength', type=float, help='Wavelength, m')
    fig3.add_argument('--z-min', type=float, help='Shortest distance, m')
    fig3.add_argument('--z-max', type=float, help='Longest distance, m')
    fig3.add_argument('--points', type=_count, help='Distances (log-spaced)')
    fig3.add_argument('--beta-rec', type=float, help='Reconciliation efficiency')
    fig3.add_argument('--excess', type=float, default=0.0, help="Excess noise on Bob's mode")

    proto = sub.add_parser('protocol', parents=[common], help='Run the two-party protocol once')
    proto.add_argument('--seed', type=_seed, help='64-bit seed (required)')
    proto.add_argument('--n-windows', type=_count, help='Time windows')
    proto.add_argument('--reveal-fraction', type=float, help='Share of sifted windows revealed')
    proto.add_argument('--beta-rec', type=float, help='Reconciliation efficiency')
    proto.add_argument('--scheduler', choices=['interleaved', 'threaded'], default='interleaved')
    proto.add_argument('--from-vacuum', action='store_true', help='Use the detected vacuum at (--omega, --a)')
    proto.add_argument('--a', type=float, help='Scaling rate, rad/s')
    proto.add_argument('--omega', type=float, help='Peak frequency, rad/s')
    proto.add_argument('--gain', type=float, help='Use an EPR source of this gain')
    proto.add_argument('--eta', type=float, help="Transmissivity of Bob's channel")
    proto.add_argument('--z', type=float, help='Diffraction-channel distance, m')
    proto.add_argument('--waist', type=float, help='Beam waist W, m')
    proto.add_argument('--wavelength', type=float, help='Wavelength, m')
    proto.add_argument('--excess', type=float, default=0.0, help="Excess noise on Bob's mode")

    return parser


def _file_argv(path: str) -> List[str]:
    """Turn a config file into flags placed ahead of the real command line."""
    argv = []
    for key, value in Config.load_file(path).items():
        if key == 'config':
            raise UsageError("a config file cannot name another config file")
        flag = '--' + key.replace('_', '-')
        if key in _FLAG_KEYS:
            word = value.lower()
            if word in _TRUE_WORDS:
                argv.append(flag)
            elif word not in _FALSE_WORDS:
                raise UsageError(f"{key.upper()} must be true or false, got {value}")
        else:
            argv.extend([flag, value])
    return argv


def parse_args(argv: List[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        split = argv.index(args.command) + 1
        args = parser.parse_args(argv[:split] + _file_argv(args.config) + argv[split:])
    return args


# ============================================================
# Subcommands
# ============================================================

def _render(frame, args, sig_digits: int) -> str:
    if args.format == 'json':
        return frame_to_json(frame)
    return frame_to_csv(frame, sig_digits)


def _pick(value, default):
    return default if value is None else value


def cmd_fig1(args) -> int:
    preset = Config.FIG1_PRESETS[args.preset]
    spec_fields = {}
    if args.rel_tol is not None:
        spec_fields['rel_tol'] = args.rel_tol
    if args.max_evals is not None:
        spec_fields['max_evals'] = args.max_evals

    coordinator = ReproductionCoordinator(spec=QuadratureSpec(**spec_fields), workers=args.workers)
    grid = linear_grid(
        _pick(args.omega_min, preset['omega_min']),
        _pick(args.omega_max, preset['omega_max']),
        _pick(args.points, preset['points']),
    )
    frame = coordinator.run_fig1(
        _pick(args.a, preset['a']),
        _pick(args.d_width, preset['d_width']),
        _pick(args.s_width, preset['s_width']),
        grid,
        args.method,
    )
    emit(_render(frame, args, Config.CSV_SIG_DIGITS), args.output)
    return EXIT_OK


def cmd_table1(args) -> int:
    coordinator = ReproductionCoordinator(workers=args.workers)
    frame = coordinator.run_table1(args.a, args.omega, args.tau_o, args.delta_tau)
    emit(_render(frame, args, Config.TABLE_SIG_DIGITS), args.output)
    return EXIT_OK


def cmd_fig3(args) -> int:
    if args.gain is not None and (args.omega is not None or args.a is not None):
        raise UsageError("give either --gain or (--omega, --a), not both")

    curves = None
    if args.gain is not None:
        curves = [{'label': 'gain', 'gain': args.gain}]
    elif args.omega is not None or args.a is not None:
        if args.omega is None or args.a is None:
            raise UsageError("a custom curve needs both --omega and --a")
        curves = [{'label': 'custom', 'omega_do': args.omega, 'a': args.a}]

    geometry = {
        'waist': _pick(args.waist, Config.FIG3_GEOMETRY['waist']),
        'wavelength': _pick(args.wavelength, Config.FIG3_GEOMETRY['wavelength']),
    }
    z_range = Config.FIG3_Z_RANGE
    z_grid = log_grid(
        _pick(args.z_min, z_range['z_min']),
        _pick(args.z_max, z_range['z_max']),
        _pick(args.points, z_range['points']),
    )

    coordinator = ReproductionCoordinator(workers=args.workers, beta_rec=args.beta_rec)
    frame = coordinator.run_fig3(curves, z_grid, geometry, args.excess)
    emit(_render(frame, args, Config.CSV_SIG_DIGITS), args.output)
    return EXIT_OK


def cmd_protocol(args) -> int:
    if args.seed is None:
        raise UsageError("protocol needs --seed (runs are never seeded from the clock)")
    if args.format == 'csv':
        raise UsageError("protocol writes a JSON transcript; --format csv is not available")
    if args.from_vacuum and args.gain is not None:
        raise UsageError("give either --from-vacuum or --gain, not both")
    if args.from_vacuum and (args.omega is None or args.a is None):
        raise UsageError("--from-vacuum needs --omega and --a")
    if args.eta is not None and args.z is not None:
        raise UsageError("give either --eta or --z, not both")

    geometry = {
        'waist': _pick(args.waist, Config.FIG3_GEOMETRY['waist']),
        'wavelength': _pick(args.wavelength, Config.FIG3_GEOMETRY['wavelength']),
    }
    coordinator = ReproductionCoordinator(workers=args.workers, beta_rec=args.beta_rec)
    cm = coordinator.protocol_state(
        omega_do=args.omega if args.from_vacuum else None,
        a=args.a if args.from_vacuum else None,
        gain=args.gain,
        eta=args.eta,
        distance=args.z,
        excess=args.excess,
        geometry=geometry,
    )
    transcript = coordinator.run_protocol(cm, args.seed, args.n_windows, args.reveal_fraction, args.scheduler)
    emit(transcript.to_json(), args.output)

    decision = transcript.decision
    key = f"{decision.key_rate.key_rate:.6g}" if decision.key_rate else 'n/a'
    eta = f"{transcript.estimated_eta:.6g}" if transcript.estimated_eta is not None else 'n/a'
    print(
        f"protocol: {'ACCEPT' if decision.accepted else 'ABORT'} ({decision.reason}) "
        f"sifted={transcript.sifted_count} revealed={transcript.revealed_count} "
        f"eta_hat={eta} key_rate={key}",
        file=sys.stderr,
    )
    return EXIT_OK if decision.accepted else EXIT_ABORT


COMMANDS = {
    'fig1': cmd_fig1,
    'table1': cmd_table1,
    'fig3': cmd_fig3,
    'protocol': cmd_protocol,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        if args.log_level:
            set_log_level(args.log_level)
        return COMMANDS[args.command](args)
    except ValueError as e:
        # UsageError, pydantic ValidationError and domain errors all land here
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Fatal error in {argv[0] if argv else 'cli'}: {e}", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
