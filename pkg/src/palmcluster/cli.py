"""Command-line experiment runner.

Example::

    palmcluster --characteristic circumradius-voronoi --rho-log 100 \\
        --replicates 10000 --subsamples 100 --out-dir out/ --emit-svg
"""

from __future__ import annotations

import argparse
import logging
import sys

from .constants import CharacteristicKind
from .exceptions import PalmClusterError
from .experiment import ExperimentConfig, default_threads, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="palmcluster",
        description="Estimate Palm cluster-size probabilities and the extremal index by simulation.",
    )
    p.add_argument(
        "--characteristic",
        required=True,
        choices=[k.value for k in CharacteristicKind],
    )
    p.add_argument("--rho-log", type=float, default=100.0, help="log(rho); default 100")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--a", type=float, default=4.0, help="Voronoi circumradius tail constant in [2, 4]")
    p.add_argument("--replicates", type=int, default=10000)
    p.add_argument("--subsamples", type=int, default=100)
    p.add_argument("--kmax", type=int, default=9)
    p.add_argument("--seed", type=int, default=20240101)
    p.add_argument("--window-mode", choices=["full", "local"], default="full")
    p.add_argument("--out-dir", default="palmcluster-out")
    p.add_argument("--emit-svg", action="store_true")
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker processes (default: $PALMCLUSTER_THREADS or 1)",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = ExperimentConfig(
            characteristic=args.characteristic,
            log_rho=args.rho_log,
            tau=args.tau,
            epsilon=args.epsilon,
            a=args.a,
            replicates=args.replicates,
            subsamples=args.subsamples,
            k_max=args.kmax,
            seed=args.seed,
            window_mode=args.window_mode,
            out_dir=args.out_dir,
            emit_svg=args.emit_svg,
        )
        result = run(config, threads=args.threads if args.threads is not None else default_threads())
    except PalmClusterError as exc:
        print(f"palmcluster: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"palmcluster: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"palmcluster: {exc}", file=sys.stderr)
        return 10
    s = result.stats
    print(f"threshold v0 = {result.plan.v0:.6g}")
    print(f"theta_hat = {s.theta_hat:.6f}  (subsample IQR {s.theta_iqr:.4f})")
    print("p_hat = " + " ".join(f"{p:.4f}" for p in s.p_hat) + f"  overflow {s.overflow:.4f}")
    print(f"reports in {args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
