"""Experiment runner: named, seeded, reproducible experiments from the shell.

Subcommands: identity, bridge, rayknight, levy, analytic-check.  Exit code 0
when every metric passes, 1 on any metric failure, 2 on usage or config
errors.  Flag precedence: command line > config file (flat key=value lines,
'#' comments) > built-in defaults; the resolved configuration is echoed into
the report.
"""

import argparse
import csv
import sys

import numpy as np

from . import experiments, figures

_DEFAULTS = {
    "identity": {"model": "rbm", "mu": 1.0, "gamma": 1.0, "nu": -0.5,
                 "paths": 50000, "dt": 1e-3, "seed": 1, "workers": 1,
                 "alpha_grid": "0.5,1,2", "beta_grid": "0,0.5,1",
                 "uniformity_bins": 0},
    "bridge": {"l": 1.0, "paths": 20000, "dt": 5e-4, "seed": 1, "workers": 1},
    "rayknight": {"mu": 1.0, "paths": 50000, "dt": 1e-4, "seed": 1,
                  "workers": 1, "d0_dt": 1e-3},
    "levy": {"gamma": 1.0, "nu": -0.5, "mu": 1.0, "truncation": 200},
    "analytic-check": {"mu": 1.0, "gamma": 1.0, "nu": -0.5, "truncation": 200},
}

_TYPES = {"model": str, "mu": float, "gamma": float, "nu": float,
          "paths": int, "dt": float, "seed": int, "workers": int,
          "alpha_grid": str, "beta_grid": str, "uniformity_bins": int,
          "l": float, "d0_dt": float, "truncation": int}


def _build_parser():
    p = argparse.ArgumentParser(
        prog="excursionlab",
        description="Monte Carlo checks of stationary-excursion identities")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sim=True):
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--out", help="write the JSON report here")
        sp.add_argument("--samples-out", help="write sample CSVs here")
        sp.add_argument("--figures-out", help="render diagnostic figures here")
        if sim:
            sp.add_argument("--paths", type=int)
            sp.add_argument("--dt", type=float)
            sp.add_argument("--seed", type=int)
            sp.add_argument("--workers", type=int)

    sp = sub.add_parser("identity", help="straddling-excursion identity suite")
    common(sp)
    sp.add_argument("--model", choices=("rbm", "reflbm01", "sqou"))
    sp.add_argument("--mu", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--alpha-grid", dest="alpha_grid")
    sp.add_argument("--beta-grid", dest="beta_grid")
    sp.add_argument("--uniformity-bins", dest="uniformity_bins", type=int)

    sp = sub.add_parser("bridge", help="excursion-bridge uniformity suite")
    common(sp)
    sp.add_argument("--l", type=float, help="bridge length")

    sp = sub.add_parser("rayknight", help="local-time profile and identity chain")
    common(sp)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--d0-dt", dest="d0_dt", type=float,
                    help="time step for the d0 comparison batch")

    sp = sub.add_parser("levy", help="Levy-measure and spectral-mixture checks")
    common(sp, sim=False)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--truncation", type=int)

    sp = sub.add_parser("analytic-check", help="full closed-form identity suite")
    common(sp, sim=False)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--truncation", type=int)
    return p


def _read_config(path):
    cfg = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, val = (part.strip() for part in line.split("=", 1))
                key = key.replace("-", "_")
                if key not in _TYPES:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                cfg[key] = _TYPES[key](val)
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}")
    return cfg


def _resolve(args, command):
    cfg = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        file_cfg = _read_config(args.config)
        for k, v in file_cfg.items():
            if k in cfg:
                cfg[k] = v
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _grid(text):
    vals = [float(tok) for tok in text.split(",") if tok.strip()]
    if not vals:
        raise ValueError(f"empty grid {text!r}")
    return vals


def _write_csv(path, header, columns):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])


def _sibling(path, suffix):
    if path.endswith(".csv"):
        return path[:-4] + suffix + ".csv"
    return path + suffix


def _emit(report, args):
    for m in report.metrics:
        status = "PASS" if m.passed else "FAIL"
        print(f"{status} {m.name} value={m.value:.6g} tolerance={m.tolerance:.6g}")
    print(f"{'PASS' if report.overall_pass else 'FAIL'} overall "
          f"({report.wall_time_seconds:.1f}s)")
    if args.out:
        report.to_json(args.out)
    return 0 if report.overall_pass else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args, args.command)
        if args.command == "identity":
            report, samples = experiments.run_identity(
                model_name=cfg["model"], mu=cfg["mu"], gamma=cfg["gamma"],
                nu=cfg["nu"], n=cfg["paths"], dt=cfg["dt"], seed=cfg["seed"],
                workers=cfg["workers"], alpha_grid=_grid(cfg["alpha_grid"]),
                beta_grid=_grid(cfg["beta_grid"]),
                uniformity_bins=cfg["uniformity_bins"])
            if args.samples_out:
                _write_csv(args.samples_out,
                           ["minus_g0", "d0", "i_plus", "i_minus"],
                           [samples.minus_g0, samples.d0, samples.i_plus,
                            samples.i_minus])
            if args.figures_out:
                figures.save_identity_figures(
                    samples, args.figures_out, model_name=cfg["model"],
                    mu=cfg["mu"], gamma=cfg["gamma"], nu=cfg["nu"])
        elif args.command == "bridge":
            report, samples = experiments.run_bridge(
                l=cfg["l"], n=cfg["paths"], dt=cfg["dt"], seed=cfg["seed"],
                workers=cfg["workers"])
            if args.samples_out:
                _write_csv(args.samples_out, ["u", "i_l_plus", "i_l_minus"],
                           [samples["u"], samples["i_l_plus"],
                            samples["i_l_minus"]])
                _write_csv(_sibling(args.samples_out, "_bb"),
                           ["occupation"], [samples["bb_occupation"]])
            if args.figures_out:
                figures.save_bridge_figures(samples, args.figures_out,
                                            l=cfg["l"])
        elif args.command == "rayknight":
            report, samples = experiments.run_rayknight(
                mu=cfg["mu"], n=cfg["paths"], dy=cfg["dt"], seed=cfg["seed"],
                workers=cfg["workers"], d0_dt=cfg["d0_dt"])
            if args.samples_out:
                _write_csv(args.samples_out, ["zeta", "area"],
                           [samples["zeta"], samples["area"]])
                _write_csv(_sibling(args.samples_out, "_profile"),
                           ["l_e_at_x0", "h0_l"],
                           [samples["l_e_at_x0"], samples["h0_l"]])
            if args.figures_out:
                figures.save_rayknight_figures(samples, args.figures_out,
                                               mu=cfg["mu"])
        elif args.command == "levy":
            report, samples = experiments.run_levy(
                gamma=cfg["gamma"], nu=cfg["nu"], mu=cfg["mu"],
                truncation=cfg["truncation"])
            if args.samples_out:
                _write_csv(args.samples_out, ["rate", "weight"],
                           [samples["rates"], samples["weights"]])
            if args.figures_out:
                figures.save_levy_figures(samples, args.figures_out,
                                          gamma=cfg["gamma"], nu=cfg["nu"])
        elif args.command == "analytic-check":
            report, _ = experiments.run_analytic_check(
                mu=cfg["mu"], gamma=cfg["gamma"], nu=cfg["nu"],
                truncation=cfg["truncation"])
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command!r}")
        return _emit(report, args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"run 'excursionlab {args.command} --help' for usage",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
