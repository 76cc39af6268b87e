"""Reproduce every figure and table preset into one output directory.

Usage:
    python scripts/reproduce_all.py                      # writes into ./results
    python scripts/reproduce_all.py --out-dir out --workers 4 --seed 7

Writes fig1a.csv, fig1b.csv, table1.csv, fig3.csv and protocol.json, then
prints the printed-vs-computed Table I comparison.
"""
import argparse
import os
import sys

# Add parent dir to path so we can import project modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import Config
from coordinator import ReproductionCoordinator
from utils import atomic_write_text, frame_to_csv, setup_logger

logger = setup_logger(__name__)

# End-to-end protocol run: the Fig. 3 blue curve at 100 km
PROTOCOL_SOURCE = {'omega_do': 40e9, 'a': 60e9, 'distance': 1e5}


def compare_table1(frame) -> None:
    print("\nTable I: printed vs computed")
    for printed, (_, row) in zip(Config.TABLE1_PRINTED, frame.iterrows()):
        print(
            f"  tau_o={printed['tau_o']:.2e}  "
            f"omega_i {printed['omega_i']:.3g} -> {row['omega_i_rad_s']:.3g}  "
            f"omega_f {printed['omega_f']:.3g} -> {row['omega_f_rad_s']:.3g}  "
            f"delta_t {printed['delta_t']:.3g} -> period {row['period_f_s']:.3g} "
            f"(interval {row['delta_t_s']:.3g})"
        )


def main():
    parser = argparse.ArgumentParser(description='Reproduce all presets.')
    parser.add_argument('--out-dir', default='results', help='Output directory')
    parser.add_argument('--workers', type=int, default=1, help='Processes for exact sweeps')
    parser.add_argument('--seed', type=int, default=1, help='Protocol seed')
    args = parser.parse_args()

    coordinator = ReproductionCoordinator(workers=args.workers)

    for preset in sorted(Config.FIG1_PRESETS):
        frame = coordinator.run_fig1_preset(preset)
        atomic_write_text(os.path.join(args.out_dir, f"fig1{preset}.csv"),
                          frame_to_csv(frame, Config.CSV_SIG_DIGITS))
        print(f"fig1{preset}: max purity {frame['purity_exact'].max():.4f}")

    table = coordinator.run_table1()
    atomic_write_text(os.path.join(args.out_dir, 'table1.csv'), frame_to_csv(table, Config.TABLE_SIG_DIGITS))
    compare_table1(table)

    fig3 = coordinator.run_fig3()
    atomic_write_text(os.path.join(args.out_dir, 'fig3.csv'), frame_to_csv(fig3, Config.CSV_SIG_DIGITS))

    cm = coordinator.protocol_state(**PROTOCOL_SOURCE)
    transcript = coordinator.run_protocol(cm, args.seed)
    atomic_write_text(os.path.join(args.out_dir, 'protocol.json'), transcript.to_json())
    print(f"\nprotocol: {'accepted' if transcript.decision.accepted else 'aborted'} "
          f"({transcript.decision.reason})")


if __name__ == '__main__':
    main()
