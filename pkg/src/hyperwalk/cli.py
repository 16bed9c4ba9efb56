"""Command-line front end: ``hyperwalk kernel | simulate | estimate | limits | verify``.

All commands read the same JSON config schema (flags override its fields),
write comma-separated files with 17 significant digits into ``--out``, and
record a ``manifest.json`` listing every output with its SHA-256 digest.

Exit codes: 0 success, 2 usage, 3 configuration, 4 input/output,
5 model or parameter error, 6 verification failure, 7 estimation error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (ar1_stationary, definetti_limit_prob, extreme_point_limits, hermite_tail_bound,
                          hermite_transition_density, marginal_mean_path, normal_limit_params, phi_moments_beta)
from .core import validate_params
from .estimator import (estimate_phi_gamma, estimate_thetas, path_stats, theta_distribution_summary)
from .exceptions import (AllZeroCounts, BoundaryEstimate, ConfigError, DegenerateTransition, HyperwalkError,
                         NoVariation, PathFormatError, TooFewEstimates, TooLarge)
from .io import (dumps_json, fmt, read_json, read_path, sha256_file, write_csv, write_hamming_csv, write_json,
                 write_kernel_csv, write_latent_csv, write_path, write_table)
from .kernel import DENSE_MAX_N, full_kernel, hamming_kernel, spectrum_from_latent
from .latent import DeFinetti, ExtremePoint, IidTheta, from_config
from .oracle import oracle_kernel, oracle_lump_hamming
from .simulator import SimConfig, simulate_replicates
from .verify import DEFAULT_SUITES, SUITES, run_suites

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_MODEL = 5
EXIT_VERIFY = 6
EXIT_ESTIMATE = 7
VERIFY_TOL = 1e-10

ESTIMATOR_ERRORS = (NoVariation, AllZeroCounts, BoundaryEstimate, TooFewEstimates, DegenerateTransition)


class VerificationFailed(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int | None
    version: str
    started: str
    finished: str = ""
    outputs: list = field(default_factory=list)

    def add(self, file: Path):
        self.outputs.append({"file": file.name, "sha256": sha256_file(file)})

    def write(self, out: Path) -> Path:
        self.finished = _now()
        return write_json(out / "manifest.json", asdict(self))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _digest(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def resolve_threads(value: int | None) -> int:
    """``--threads``, else ``HYPERWALK_THREADS``, else the number of available cores."""
    if value is not None:
        threads = value
    elif os.environ.get("HYPERWALK_THREADS"):
        try:
            threads = int(os.environ["HYPERWALK_THREADS"])
        except ValueError:
            raise ConfigError("HYPERWALK_THREADS must be an integer") from None
    else:
        threads = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    return threads


def _load_config(args) -> dict:
    config = read_json(args.config) if getattr(args, "config", None) else {}
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("phi", "gamma", "n", "steps", "seed", "replicates", "mode"):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _require(config: dict, *keys):
    missing = [k for k in keys if k not in config]
    if missing:
        raise ConfigError(f"config is missing {', '.join(missing)}")


def _params_and_model(config: dict):
    _require(config, "phi", "gamma", "n", "latent")
    params = validate_params(config["phi"], config["gamma"], int(config["n"]))
    return params, from_config(config["latent"])


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_kernel(args) -> int:
    config = _load_config(args)
    params, model = _params_and_model(config)
    mode = config.get("mode", "hamming" if model.exchangeable else "full")
    if mode not in ("full", "hamming"):
        raise ConfigError(f"mode must be 'full' or 'hamming', got {mode!r}")
    if mode == "full" and params.n > DENSE_MAX_N:
        raise TooLarge(f"n={params.n} too large for dense kernel (limit {DENSE_MAX_N})")
    if mode == "hamming" and not model.exchangeable:
        raise ConfigError("the Hamming kernel needs an exchangeable latent law")
    out = _out_dir(args)
    manifest = RunManifest("kernel", _digest(config), None, __version__, _now())
    spectrum = spectrum_from_latent(model, params)
    if mode == "full":
        matrix = full_kernel(spectrum).matrix
        kfile = write_kernel_csv(out / "kernel.csv", matrix)
    else:
        matrix = np.asarray(hamming_kernel(spectrum), dtype=float)
        kfile = write_kernel_csv(out / "kernel.csv", matrix, labels=range(params.n + 1))
    manifest.add(kfile)
    manifest.add(write_json(out / "spectrum.json", spectrum.to_dict()))
    deviation = None
    if args.verify:
        oracle = oracle_kernel(model, params)
        reference = oracle.matrix if mode == "full" else oracle_lump_hamming(oracle).matrix
        deviation = float(np.abs(np.asarray(reference, dtype=float) - matrix).max())
        manifest.add(write_json(out / "verify.json", {"max_deviation": deviation, "tolerance": VERIFY_TOL,
                                                      "passed": deviation <= VERIFY_TOL}))
    manifest.write(out)
    print(f"kernel: {mode} {matrix.shape[0]}x{matrix.shape[1]} written to {kfile}")
    if deviation is not None:
        print(f"verify: max deviation {fmt(deviation)}")
        if deviation > VERIFY_TOL:
            raise VerificationFailed(f"kernel differs from the oracle by {deviation:.3g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load_config(args)
    config.setdefault("steps", 0)
    try:
        sim = SimConfig.from_dict(config)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, HyperwalkError):
            raise
        raise ConfigError(str(exc)) from None
    threads = resolve_threads(args.threads)
    out = _out_dir(args)
    manifest = RunManifest("simulate", _digest(config), sim.seed, __version__, _now())
    paths = simulate_replicates(sim, threads=threads)
    ext = "json" if args.path_format == "json" else "txt"
    for r, path in enumerate(paths):
        manifest.add(write_path(out / f"path_{r:03d}.{ext}", path, args.path_format))
        manifest.add(write_hamming_csv(out / f"hamming_{r:03d}.csv", path))
        if path.latent_log is not None:
            manifest.add(write_latent_csv(out / f"latent_{r:03d}.csv", path.latent_log))
    manifest.write(out)
    print(f"simulate: {len(paths)} replicate(s), {sim.steps} steps, n={sim.params.n}, seed={sim.seed}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    path = read_path(args.path)
    out = _out_dir(args)
    config = {"path": str(args.path), "phi": args.phi, "gamma": args.gamma, "reference": args.reference,
              "bins": args.bins}
    manifest = RunManifest("estimate", _digest(config), None, __version__, _now())
    stats = path_stats(path)
    if (args.phi is None) != (args.gamma is None):
        raise ConfigError("give both --phi and --gamma, or neither")
    report = {"n": path.n, "steps": path.steps, "degenerate_transitions": list(stats.degenerate)}
    if args.phi is None:
        est = estimate_phi_gamma(stats)
        phi, gamma = est
        report.update(excluded_transitions=est.excluded, no_variation=est.no_variation, issues=list(est.issues),
                      least_squares=True)
    else:
        phi, gamma = float(args.phi), float(args.gamma)
        report.update(excluded_transitions=0, least_squares=False)
    thetas = estimate_thetas(stats, phi, gamma)
    report.update(phi_hat=phi, gamma_hat=gamma, theta_hats=[e.theta_hat for e in thetas],
                  converged=[e.converged for e in thetas])
    manifest.add(write_csv(out / "theta_hat.csv", ["t", "theta_hat", "converged"],
                           ((e.t, e.theta_hat, e.converged) for e in thetas)))
    try:
        summary = theta_distribution_summary(thetas, reference=args.reference, bins=args.bins)
    except TooFewEstimates as exc:
        report.update(ks_distance=None, summary_skipped=str(exc))
    else:
        report.update(ks_distance=summary.ks_distance, theta_mean=summary.mean, theta_variance=summary.variance)
        manifest.add(write_csv(out / "histogram.csv", ["left", "right", "density", "reference_density"],
                               summary.histogram_rows()))
    manifest.add(write_json(out / "report.json", report))
    manifest.write(out)
    print(f"estimate: phi_hat={fmt(phi)} gamma_hat={fmt(gamma)} over {len(thetas)} transitions")
    if report.get("ks_distance") is not None:
        print(f"estimate: KS distance to reference {fmt(report['ks_distance'])}")
    return EXIT_OK


def cmd_limits(args) -> int:
    config = _load_config(args)
    params, model = _params_and_model(config)
    out = _out_dir(args)
    manifest = RunManifest("limits", _digest(config), None, __version__, _now())
    n = params.n
    theta_bar = float(model.mean_frequency(n))
    report = {"phi": float(params.phi), "gamma": float(params.gamma), "n": n, "latent": model.to_config(),
              "alpha": float(params.alpha), "psi": float(params.psi), "latent_mean_frequency": theta_bar}
    if model.exchangeable and not params.boundary:
        report["stationary_coordinate_prob"] = definetti_limit_prob(params, theta_bar)
    theta = float(config.get("theta", theta_bar))
    u = float(config.get("u", 0.0))
    if 0 < theta < 1:
        lim = normal_limit_params(theta, u, params)
        report["normal_limit"] = {"theta": theta, "u": u, "mu": lim.mu, "sigma2": lim.sigma2}
    if "c" in config and 0 < theta < 1:
        mean, var = ar1_stationary(theta, float(config["c"]), float(params.phi))
        report["ar1_stationary"] = {"c": float(config["c"]), "theta": theta, "mean": mean, "variance": var}
    if isinstance(model, ExtremePoint):
        ep = extreme_point_limits(model.M, n, params)
        report["extreme_point"] = {"p": ep.p, "poisson_rate": ep.poisson_rate, "complement": ep.complement}
    steps = int(config.get("steps", 20))
    ts = np.arange(steps + 1)
    rows = {"t": ts}
    for x0 in (0, 1):
        rows[f"mean_from_{x0}"] = [float(marginal_mean_path(np.array([x0]), theta_bar, params, int(t))[0])
                                   for t in ts]
    manifest.add(write_table(out / "mean_path.csv", rows))
    if isinstance(model, DeFinetti) and model.is_beta and "c" in config:
        c, phi = float(config["c"]), float(params.phi)
        v_prev = float(config.get("v_prev", 0.0))
        grid = np.linspace(-4, 4, int(config.get("grid_points", 201))) * np.sqrt(phi * (1 - phi))
        moments = phi_moments_beta(float(model.a), float(model.b), phi, 40)
        density = hermite_transition_density(grid, v_prev, c, phi, moments, j_max=40)
        manifest.add(write_table(out / "hermite_density.csv", {"v": grid, "density": density}))
    elif isinstance(model, IidTheta) and "c" in config:
        c, phi = float(config["c"]), float(params.phi)
        v_prev = float(config.get("v_prev", 0.0))
        grid = np.linspace(-4, 4, int(config.get("grid_points", 201))) * np.sqrt(phi * (1 - phi))
        shrink = 1 - float(model.theta) / phi
        density = hermite_transition_density(grid, v_prev, c, phi, shrink ** np.arange(41), j_max=40)
        tail = hermite_tail_bound(grid, v_prev, c, phi, abs(shrink), j_max=40)
        manifest.add(write_table(out / "hermite_density.csv", {"v": grid, "density": density, "tail_bound": tail}))
    manifest.add(write_json(out / "limits.json", report))
    manifest.write(out)
    sys.stdout.write(dumps_json(report))
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.suite or list(DEFAULT_SUITES)
    if "all" in names:
        names = list(SUITES)
    out = _out_dir(args)
    manifest = RunManifest("verify", _digest({"suites": names, "perturb": args.perturb_kappa}), None,
                           __version__, _now())
    report = run_suites(names, perturb_kappa=args.perturb_kappa)
    manifest.add(write_json(out / "verify_report.json", report))
    manifest.write(out)
    for suite, s in report["suites"].items():
        status = "PASS" if s["failed"] == 0 else "FAIL"
        print(f"{status} {suite}: {s['checks']} checks, {s['failed']} failed, "
              f"max deviation {fmt(s['max_deviation'])}")
    if not report["passed"]:
        raise VerificationFailed("verification failed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperwalk", description="Long-range random walks on the hypercube.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--phi", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--n", type=int)

    p = sub.add_parser("kernel", help="write a kernel as CSV and its eigenvalues as JSON")
    common(p)
    p.add_argument("--mode", choices=("full", "hamming"))
    p.add_argument("--verify", action="store_true", help="compare against the brute-force oracle")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("simulate", help="simulate sample paths")
    common(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--path-format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate (phi, gamma) and per-step latent frequencies from a path")
    p.add_argument("path", help="path file: one 0/1 string per line, or a JSON array")
    p.add_argument("--out", default=".")
    p.add_argument("--phi", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--reference", type=float, nargs=2, metavar=("A", "B"), help="Beta(A, B) reference law")
    p.add_argument("--bins", type=int, default=30)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("limits", help="closed-form limits and moment tables")
    common(p)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("verify", help="run the oracle equivalence batteries")
    p.add_argument("--suite", action="append", choices=sorted(SUITES) + ["all"])
    p.add_argument("--perturb-kappa", type=float, default=None, metavar="EPS",
                   help="test hook: perturb the forward eigenvalues in the reversibility suite")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"hyperwalk: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ConfigError as exc:
        print(f"hyperwalk: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PathFormatError, OSError) as exc:
        print(f"hyperwalk: input/output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ESTIMATOR_ERRORS as exc:
        print(f"hyperwalk: estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATE
    except HyperwalkError as exc:
        print(f"hyperwalk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
