"""Batch command-line front-end.

Subcommands map one-to-one onto the reference experiments::

    dickeaudit converge --config configs/quick_converge.cfg --out out
    dickeaudit dos      --config configs/quick_dos.cfg --out out
    dickeaudit rstat    --config configs/quick_rstat.cfg --out out
    dickeaudit chaos    --config configs/quick_chaos.cfg --out out
    dickeaudit goe-ref  --config configs/goe_ref.cfg --out out --seed 7

Exit status: 0 on success, 2 on an invariant violation (untrusted window
without --allow-unconverged, monotonicity failure), 1 on any other error.
"""

from __future__ import annotations

import argparse
import os
import sys


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickeaudit",
        description="Truncation-convergence audit and spectral statistics "
        "for the Dicke model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("converge", "eigenlevel convergence across a cutoff ladder"),
        ("dos", "density-of-states histograms vs the semiclassical curve"),
        ("rstat", "mean consecutive-gap ratio vs cutoff"),
        ("chaos", "spacing distribution and delta_q power spectrum"),
        ("goe-ref", "GOE and Poisson sampling references"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="experiment config file")
        cmd.add_argument("--out", default="out", help="output directory (default: out)")
        cmd.add_argument("--seed", type=int, default=0, help="master random seed")
        cmd.add_argument(
            "--allow-unconverged",
            action="store_true",
            help="histogram untrusted energies anyway; outputs are "
            "watermarked UNCONVERGED",
        )
        cmd.add_argument(
            "--threads",
            type=int,
            default=None,
            help="cap BLAS threads for the dense eigensolver",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        # must happen before numpy loads its BLAS
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    from dickeaudit import runner
    from dickeaudit.config import ConfigError, load_config

    dispatch = {
        "converge": runner.run_convergence_figure,
        "dos": runner.run_dos_figure,
        "rstat": runner.run_rstat_figure,
        "chaos": runner.run_chaos_figure,
        "goe-ref": runner.run_goe_reference,
    }
    try:
        cfg = load_config(
            args.config,
            out_dir=args.out,
            seed=args.seed,
            allow_unconverged=args.allow_unconverged,
        )
        manifest = dispatch[args.command](cfg)
    except runner.AuditError as exc:
        print(f"dickeaudit: invariant violation: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, OSError, RuntimeError, ValueError) as exc:
        print(f"dickeaudit: error: {exc}", file=sys.stderr)
        return 1
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
