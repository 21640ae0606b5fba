"""
Reprodução offline das tabelas de simulação (cenários 1 e 2, n = 5000 e
10000, 1000 replicações). Leva horas; grava um CSV por (cenário, n).

Uso:
    python scripts/reproduce_tables.py --out resultados --threads 8
"""
import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from causalnet.controllers.simulation_controller import McConfig, monte_carlo_run  # noqa: E402
from causalnet.utils.logger import setup_logger  # noqa: E402
from causalnet.utils.save_manager import SaveManager  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description="Reproduz as tabelas de Monte Carlo")
    parser.add_argument('--out', default='resultados')
    parser.add_argument('--reps', type=int, default=1000)
    parser.add_argument('--sizes', default='5000,10000')
    parser.add_argument('--settings', default='1,2')
    parser.add_argument('--threads', type=int, default=1)
    parser.add_argument('--seed', type=int, default=2024)
    args = parser.parse_args()

    logger = setup_logger(log_file=os.path.join(args.out, 'reproduce.log'))
    os.makedirs(args.out, exist_ok=True)
    manager = SaveManager()
    for setting in (int(s) for s in args.settings.split(',')):
        for n in (int(s) for s in args.sizes.split(',')):
            cfg = McConfig(setting=setting, n=n, replications=args.reps, base_seed=args.seed,
                           threads=args.threads)
            logger.info(f"Cenário {setting}, n={n}, R={args.reps}")
            report = monte_carlo_run(cfg)
            manager.save_report(report, os.path.join(args.out, f"setting{setting}_n{n}.csv"))
            manager.save_report(report, os.path.join(args.out, f"setting{setting}_n{n}.json"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
