"""Write the transmit beampattern for two budgets and the RF-design convergence trace."""
import argparse
from pathlib import Path

from isac_hbf import SystemConfig
from isac_hbf.runner import design_beampattern, emit_beampattern_csv, emit_convergence_csv


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for eps in (-10.0, -30.0):
        angles, gains, _ = design_beampattern(SystemConfig(n_tx=32, n_rx=4, epsilon_db=eps))
        emit_beampattern_csv(angles, gains, args.out / f"beampattern_eps{int(-eps)}.csv")
    emit_convergence_csv(SystemConfig(), args.out / "convergence.csv")


if __name__ == "__main__":
    main()
