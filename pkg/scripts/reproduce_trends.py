"""Write the trend sweeps (SNR, budget, number of targets, GM objective) as CSV files."""
import argparse
import logging
from pathlib import Path

from isac_hbf import SystemConfig
from isac_hbf.runner import DesignCache, emit_csv, run_sweep


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    log = logging.getLogger("trends")
    args.out.mkdir(parents=True, exist_ok=True)
    base = SystemConfig(n_tx=32, n_rx=4, n_trials=args.trials, seed=args.seed)

    for eps in (-10.0, -30.0):
        res = run_sweep(base.replace(epsilon_db=eps), "snr_db", range(0, 31, 5), cache=DesignCache(),
                        progress=log.info)
        emit_csv(res, args.out / f"sum_se_vs_snr_eps{int(-eps)}.csv")
    emit_csv(run_sweep(base, "n_targets", [1, 2, 3, 4], progress=log.info), args.out / "sum_se_vs_targets.csv")
    for objective in ("sum_se", "gm_se"):
        cfg = base.replace(epsilon_db=-30.0, objective=objective)
        emit_csv(run_sweep(cfg, "snr_db", [10.0, 20.0], progress=log.info), args.out / f"min_rate_{objective}.csv")


if __name__ == "__main__":
    main()
