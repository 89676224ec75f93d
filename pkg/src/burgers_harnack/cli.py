"""Command-line entry point: config parsing, experiment dispatch, output management.

Exit codes are the machine contract: 0 when every verdict passes, 1 on any
statistical failure, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (EXPERIMENT_NAMES, HARNACK_EXPERIMENTS, run_bilinear_scan,
                          run_convergence, run_energy_identity, run_exp_moment,
                          run_gradient_grid, run_irreducibility, run_log_harnack_grid,
                          run_mixing, run_strong_feller)
from .noise import NoiseSpec, a_minus_half_op_norm, admissible
from .reports import write_csv
from .sde import SCHEMES, SimConfig

DEFAULT_SAMPLES = {
    "bilinear": 10_000,
    "energy": 10_000,
    "log-harnack": 100_000,
    "gradient": 10_000,
    "exp-moment": 100_000,
    "convergence": 1_000,
    "irreducibility": 10_000,
    "mixing": 10_000,
    "strong-feller": 10_000,
}


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    nu: float = 2.0
    m: int = 32
    dt: float = 1e-3
    seed: int = 42
    scheme: str = "semi_implicit"
    threads: int | None = None
    q0: float = 0.5
    gamma: float = 1.0
    q_list: list | None = None
    energy_t: float = 0.5
    samples: dict | None = None  # per-experiment overrides

    def noise(self, m: int | None = None) -> NoiseSpec:
        m = self.m if m is None else m
        if self.q_list is not None:
            if len(self.q_list) < m:
                raise ConfigError(f"noise.q: need at least {m} amplitudes, "
                                  f"got {len(self.q_list)}")
            return NoiseSpec(m, np.asarray(self.q_list[:m], dtype=float))
        return NoiseSpec.power_law(m, self.q0, self.gamma)

    def sim(self, t_end: float = 1.0) -> SimConfig:
        return SimConfig(nu=self.nu, m=self.m, dt=self.dt, t_end=t_end,
                         seed=self.seed, scheme=self.scheme)

    def n_samples(self, experiment: str) -> int:
        if self.samples and experiment in self.samples:
            return self.samples[experiment]
        return DEFAULT_SAMPLES[experiment]


def _expect(cond: bool, key: str, why: str):
    if not cond:
        raise ConfigError(f"config key {key!r}: {why}")


def parse_config(path: str | None) -> AppConfig:
    """Load and validate the JSON configuration; {} yields full defaults."""
    if path is None:
        raw = {}
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    known = {"nu", "m", "dt", "seed", "scheme", "threads", "noise", "energy_t",
             "samples"}
    for key in raw:
        _expect(key in known, key, "unknown key")

    app = AppConfig()
    if "nu" in raw:
        _expect(isinstance(raw["nu"], (int, float)) and raw["nu"] > 0, "nu",
                "must be a positive number")
        app.nu = float(raw["nu"])
    if "m" in raw:
        _expect(isinstance(raw["m"], int) and raw["m"] >= 1, "m",
                "must be a positive integer")
        app.m = raw["m"]
    if "dt" in raw:
        _expect(isinstance(raw["dt"], (int, float)) and raw["dt"] > 0, "dt",
                "must be a positive number")
        app.dt = float(raw["dt"])
    if "seed" in raw:
        _expect(isinstance(raw["seed"], int) and 0 <= raw["seed"] < 2 ** 64, "seed",
                "must be a 64-bit unsigned integer")
        app.seed = raw["seed"]
    if "scheme" in raw:
        _expect(raw["scheme"] in SCHEMES, "scheme", f"must be one of {SCHEMES}")
        app.scheme = raw["scheme"]
    if "threads" in raw:
        _expect(isinstance(raw["threads"], int) and raw["threads"] >= 1, "threads",
                "must be a positive integer")
        app.threads = raw["threads"]
    if "energy_t" in raw:
        _expect(isinstance(raw["energy_t"], (int, float)) and raw["energy_t"] > 0,
                "energy_t", "must be a positive number")
        app.energy_t = float(raw["energy_t"])
    if "noise" in raw:
        noise = raw["noise"]
        _expect(isinstance(noise, dict), "noise", "must be an object")
        if "q" in noise:
            q = noise["q"]
            _expect(isinstance(q, list) and q and
                    all(isinstance(v, (int, float)) and v > 0 for v in q),
                    "noise.q", "must be a nonempty list of positive numbers")
            app.q_list = [float(v) for v in q]
            for key in noise:
                _expect(key == "q", f"noise.{key}", "unknown key")
        else:
            for key in noise:
                _expect(key in ("q0", "gamma"), f"noise.{key}", "unknown key")
            if "q0" in noise:
                _expect(isinstance(noise["q0"], (int, float)) and noise["q0"] > 0,
                        "noise.q0", "must be a positive number")
                app.q0 = float(noise["q0"])
            if "gamma" in noise:
                _expect(isinstance(noise["gamma"], (int, float)), "noise.gamma",
                        "must be a number")
                app.gamma = float(noise["gamma"])
    if "samples" in raw:
        samples = raw["samples"]
        if isinstance(samples, int):
            _expect(samples >= 2, "samples", "must be >= 2")
            app.samples = {name: samples for name in EXPERIMENT_NAMES}
        elif isinstance(samples, dict):
            for key, v in samples.items():
                _expect(key in EXPERIMENT_NAMES, f"samples.{key}",
                        f"unknown experiment; choose from {EXPERIMENT_NAMES}")
                _expect(isinstance(v, int) and v >= 2, f"samples.{key}",
                        "must be an integer >= 2")
            app.samples = dict(samples)
        else:
            raise ConfigError("config key 'samples': must be an integer or an object")
    return app


def check_admissible(app: AppConfig) -> None:
    Q = app.noise()
    if not admissible(app.nu, Q):
        bound = 4.0 * np.pi * a_minus_half_op_norm(Q) ** 2
        raise ConfigError(
            f"noise is inadmissible for Harnack experiments: nu^3 = "
            f"{app.nu ** 3:.6g} < 4*pi*|A^-1/2 Q|^2 = {bound:.6g}")


def run_experiment(name: str, app: AppConfig, threads: int):
    """Run one named experiment, returning its report rows."""
    n = app.n_samples(name)
    if name in HARNACK_EXPERIMENTS:
        check_admissible(app)
    if name == "bilinear":
        return run_bilinear_scan(n, m=max(app.m, 64), seed=app.seed)
    if name == "energy":
        return run_energy_identity(app.sim(app.energy_t), app.noise(), n=n,
                                   threads=threads)
    if name == "log-harnack":
        return run_log_harnack_grid(app.sim(), app.noise(), n=n, threads=threads)
    if name == "gradient":
        return run_gradient_grid(app.sim(), app.noise(), n=n, threads=threads)
    if name == "exp-moment":
        return run_exp_moment(app.sim(), app.noise(), n=n, threads=threads)
    if name == "convergence":
        return run_convergence(app.sim(0.5), app.noise, n=n)
    if name == "irreducibility":
        return run_irreducibility(app.sim(0.5), app.noise(), n=n, threads=threads)
    if name == "mixing":
        return run_mixing(app.sim(), app.noise(), n=n, threads=threads)
    if name == "strong-feller":
        return run_strong_feller(app.sim(0.25), app.noise(), n=n, threads=threads)
    raise ConfigError(f"unknown experiment {name!r}; choose from "
                      f"{EXPERIMENT_NAMES + ('all',)}")


def _version_string() -> str:
    import subprocess
    try:
        desc = subprocess.run(["git", "describe", "--always", "--dirty"],
                              capture_output=True, text=True, timeout=5,
                              cwd=Path(__file__).parent).stdout.strip()
    except Exception:
        desc = ""
    return f"burgers-harnack {__version__}" + (f" ({desc})" if desc else "")


def dispatch(experiment: str, app: AppConfig, out_dir: str | Path, *,
             threads: int = 1, config_path: str | None = None,
             quiet: bool = False) -> int:
    """Run the named experiment(s), write CSV + manifest, return the exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(EXPERIMENT_NAMES) if experiment == "all" else [experiment]
    manifest = {
        "config": config_path,
        "version": _version_string(),
        "seed": app.seed,
        "out_dir": str(out),
        "threads": threads,
        "resolved": {"nu": app.nu, "m": app.m, "dt": app.dt, "scheme": app.scheme,
                     "noise": {"q": list(map(float, app.noise().q))},
                     "samples": {n: app.n_samples(n) for n in names}},
        "started": datetime.now(timezone.utc).isoformat(),
        "experiments": {},
    }
    any_fail = False
    try:
        for name in names:
            t0 = time.monotonic()
            rows = run_experiment(name, app, threads)
            elapsed = time.monotonic() - t0
            csv_path = out / f"{name}.csv"
            write_csv(csv_path, rows)
            n_fail = sum(r.verdict != "pass" for r in rows)
            any_fail = any_fail or n_fail > 0
            manifest["experiments"][name] = {
                "runtime_s": round(elapsed, 3), "rows": len(rows),
                "failures": n_fail, "csv": csv_path.name}
            if not quiet:
                status = "PASS" if n_fail == 0 else f"FAIL ({n_fail} rows)"
                print(f"{name:15s} {len(rows):6d} rows  {elapsed:8.1f}s  {status}")
    finally:
        manifest["finished"] = datetime.now(timezone.utc).isoformat()
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 1 if any_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="burgers-harnack",
        description="Monte-Carlo verification experiments for the stochastic "
                    "Burgers semigroup")
    parser.add_argument("experiment", choices=EXPERIMENT_NAMES + ("all",),
                        help="experiment to run")
    parser.add_argument("--config", metavar="PATH", help="JSON configuration file")
    parser.add_argument("--out", metavar="DIR", default="results",
                        help="output directory (default: results)")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed override")
    parser.add_argument("--threads", type=int, metavar="N",
                        help="worker threads (fallback: $BURGERS_HARNACK_THREADS, "
                             "then machine parallelism)")
    parser.add_argument("--samples", type=int, metavar="N",
                        help="sample-count override for every experiment")
    parser.add_argument("--dt", type=float, metavar="F", help="time step override")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        app = parse_config(args.config)
        if args.seed is not None:
            app.seed = args.seed
        if args.dt is not None:
            if args.dt <= 0:
                raise ConfigError("flag --dt: must be a positive number")
            app.dt = args.dt
        if args.samples is not None:
            if args.samples < 2:
                raise ConfigError("flag --samples: must be >= 2")
            app.samples = {name: args.samples for name in EXPERIMENT_NAMES}
        threads = args.threads
        if threads is None:
            threads = app.threads
        if threads is None:
            env = os.environ.get("BURGERS_HARNACK_THREADS")
            threads = int(env) if env else (os.cpu_count() or 1)
        if threads < 1:
            raise ConfigError("threads: must be a positive integer")
        return dispatch(args.experiment, app, args.out, threads=threads,
                        config_path=args.config, quiet=args.quiet)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
