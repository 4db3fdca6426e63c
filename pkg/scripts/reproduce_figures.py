#!/usr/bin/env python3
"""Reproduce the reference squeezing results as CSV files.

Runs the command-line interface for each standard scenario:

  1  N=10 noiseless curves (oat, dr-averaged, driven at n_cyc 5 and 20)
  2  N=100 noiseless curves (oat, dr-averaged, driven at n_cyc 10 and 30)
  3  N=10 noise ensemble, decoupled and bare (2000 trajectories)
  4  N=100 noise ensemble, decoupled (100 trajectories)
  5  scaling sweep with slope fits

Usage:
    python scripts/reproduce_figures.py --outdir results [--figure N] [--workers W]

Figure 3 takes a few minutes and figure 4 tens of minutes on two cores;
everything else finishes in seconds.
"""

import argparse
import sys
from pathlib import Path

from ddsqueeze.cli import main as cli

ROOT = Path(__file__).resolve().parent.parent


def run(argv):
    print("ddsqueeze " + " ".join(argv))
    code = cli(argv)
    if code != 0:
        sys.exit(code)


def figure1(outdir, workers):
    for name, extra in (
        ("oat", ["--hamiltonian", "oat"]),
        ("dr", ["--hamiltonian", "dr-averaged"]),
        ("driven_ncyc5", ["--ncyc", "5"]),
        ("driven_ncyc20", ["--ncyc", "20"]),
    ):
        run(["evolve", "--config", str(ROOT / "configs/fig1_n10_curves.yaml"),
             *extra, "--out", str(outdir / f"fig1_{name}.csv")])


def figure2(outdir, workers):
    base = ["evolve", "--n-spins", "100", "--t-end", "0.14", "--dt", "0.0002"]
    run([*base, "--hamiltonian", "oat", "--out", str(outdir / "fig2_oat.csv")])
    run([*base, "--hamiltonian", "dr-averaged", "--out", str(outdir / "fig2_dr.csv")])
    for n_cyc in (10, 30):
        run([*base, "--hamiltonian", "driven-dd", "--nx", "2", "--ny", "1",
             "--ncyc", str(n_cyc), "--t-end", "0.12",
             "--out", str(outdir / f"fig2_driven_ncyc{n_cyc}.csv")])


def figure3(outdir, workers):
    cfg = str(ROOT / "configs/fig3_n10_noise.yaml")
    run(["noise-ensemble", "--config", cfg, "--workers", str(workers),
         "--out", str(outdir / "fig3_dd_on.csv")])
    run(["noise-ensemble", "--config", cfg, "--hamiltonian", "oat",
         "--workers", str(workers), "--out", str(outdir / "fig3_dd_off.csv")])


def figure4(outdir, workers):
    run(["noise-ensemble", "--config", str(ROOT / "configs/fig4_n100_noise.yaml"),
         "--workers", str(workers), "--out", str(outdir / "fig4_dd_on.csv")])


def figure5(outdir, workers):
    run(["scaling", "--config", str(ROOT / "configs/fig5_scaling.yaml"),
         "--workers", str(workers), "--out", str(outdir / "fig5_scaling.csv")])


FIGURES = {1: figure1, 2: figure2, 3: figure3, 4: figure4, 5: figure5}


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--figure", type=int, choices=sorted(FIGURES), help="run one figure only")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    targets = [args.figure] if args.figure else sorted(FIGURES)
    for fig in targets:
        FIGURES[fig](outdir, args.workers)
    print(f"done: CSVs in {outdir}/")


if __name__ == "__main__":
    main()
