"""Command-line experiment runner with deterministic per-trial seeding."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import analytic
from .algebra import InclusionSpec, State, random_state, regularize
from .measures import entropy_difference, is_divergent
from .recovery import PetzData, PreconditionError, QuadratureSpec, SCHEMES, recovery_report

CSV_HEADER = "# modular-recovery-lab v1"
EXPERIMENTS = ("thm1", "thm2", "firstlaw", "filtering", "hirschman", "xi", "suite")
NEAR_SINGULAR = 1e-10
MONOTONICITY_TOL = 1e-8
DISTANCE_TOL = 1e-7
FIDELITY_TOL = 1e-8


class UsageError(Exception):
    """Bad configuration or I/O; maps to exit code 1."""


@dataclass
class TrialRecord:
    """One row of experiment output.

    Columns that do not apply to an experiment hold NaN.  ``wall_time`` is
    written only when timing output is requested, so files stay reproducible.
    """

    trial: int
    seed: int
    experiment: str
    blocks: str
    n: int
    rank_rho: int
    rank_sigma: int
    delta_s: float = math.nan
    fidelity_integral: float = math.nan
    quadrature_error: float = math.nan
    monotonicity_gap: float = math.nan
    raw_monotonicity_gap: float = math.nan
    eps_bound: float = math.nan
    trace_distance: float = math.nan
    recovery_fidelity_gap: float = math.nan
    metric: float = math.nan
    tolerance: float = math.nan
    passed: bool = True
    clamped: bool = False
    regularized: bool = False
    wall_time: float = math.nan

    @property
    def flagged(self):
        return self.clamped or self.regularized


COLUMNS = [f.name for f in fields(TrialRecord)]


@dataclass
class ExperimentConfig:
    experiment: str = "thm1"
    blocks: InclusionSpec = field(default_factory=lambda: InclusionSpec.parse("2x2"))
    trials: int = 100
    seed: int = 0
    rank_policy: str = "random"
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    eps: float = 1e-8
    out: str | None = None
    format: str = "csv"
    timing: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if not self.eps > 0:
            raise UsageError("eps must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.rank_policy not in ("full", "random") and not str(self.rank_policy).isdigit():
            raise UsageError("rank policy must be full, random or an integer rank")


# -- ensembles -------------------------------------------------------------------------------


def trial_streams(seed, trials):
    """Independent generators per trial from a root seed, with an integer id for each."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [(int(c.generate_state(1)[0]), np.random.default_rng(c)) for c in children]


def sample_pair(spec, rng, rank_policy="random"):
    """Draw ``(ρ, σ)``: Ginibre full-rank ``σ``; ``ρ`` according to ``rank_policy``.

    ``"random"`` gives full rank with probability 0.7 and otherwise a rank
    drawn uniformly from ``1 .. n−1``.
    """
    n = spec.n
    sigma = random_state(n, seed=rng)
    if rank_policy == "full":
        rank = n
    elif rank_policy == "random":
        rank = n if rng.random() < 0.7 else int(rng.integers(1, n))
    else:
        rank = max(1, min(n, int(rank_policy)))
    rho = random_state(n, rank=rank, seed=rng)
    return rho, sigma


# -- experiments ----------------------------------------------------------------------------


def _base(config, trial, seed, rho, sigma, name):
    return TrialRecord(trial, seed, name, str(config.blocks), config.blocks.n,
                       rho.support_rank, sigma.support_rank)


def _recovery_trial(config, trial, seed, rng, name):
    spec = config.blocks
    rho, sigma = sample_pair(spec, rng, config.rank_policy)
    rec = _base(config, trial, seed, rho, sigma, name)
    raw_gap = math.nan
    if np.linalg.eigvalsh(sigma.matrix)[0] < NEAR_SINGULAR:
        if sigma.faithful:
            raw_gap = recovery_report(spec, rho, sigma, config.quadrature).monotonicity_gap
        sigma = regularize(sigma, config.eps)
        rec.regularized = True
    rep = recovery_report(spec, rho, sigma, config.quadrature)
    rec.delta_s = rep.delta_s
    rec.fidelity_integral = rep.log_fidelity_integral
    rec.quadrature_error = rep.quadrature_error
    rec.monotonicity_gap = rep.monotonicity_gap
    rec.raw_monotonicity_gap = rep.monotonicity_gap if not rec.regularized else raw_gap
    rec.eps_bound = rep.eps_bound
    rec.trace_distance = rep.recovered_distance
    rec.recovery_fidelity_gap = rep.recovery_fidelity_gap
    rec.clamped = rep.clamped
    if name == "thm1":
        rec.metric = rep.monotonicity_gap
        rec.tolerance = MONOTONICITY_TOL + rep.quadrature_error
        rec.passed = rep.monotonicity_gap >= -rec.tolerance
    else:
        rec.metric = min(rep.recovery_distance_gap + DISTANCE_TOL,
                         rep.recovery_fidelity_gap + FIDELITY_TOL)
        rec.tolerance = 0.0
        rec.passed = rec.metric >= 0.0
    return rec


def _firstlaw_trial(config, trial, seed, rng):
    spec = config.blocks
    rho = random_state(spec.n, seed=rng)
    v = rng.standard_normal((spec.n, spec.n)) + 1j * rng.standard_normal((spec.n, spec.n))
    rec = TrialRecord(trial, seed, "firstlaw", str(spec), spec.n, rho.support_rank, 0)
    psi = analytic.HSVector(rho.sqrt())
    res = analytic.first_law_slope(psi, analytic.perturbation_family(psi, v))
    at = int(np.argmin(np.abs(res.lambdas - 1e-4)))
    rec.metric = float(max(abs(res.petz_slopes[at]), abs(res.lp_slopes[at])))
    rec.tolerance = 1e-2
    refused = False
    try:
        analytic.first_law_slope(psi, analytic.perturbation_family(psi, v, 0.5))
    except PreconditionError:
        refused = True
    rec.passed = res.monotone and rec.metric <= rec.tolerance and refused
    return rec


def _filtering_trial(config, trial, seed, rng):
    spec = config.blocks
    rho, sigma = random_state(spec.n, seed=rng), random_state(spec.n, seed=rng)
    rec = _base(config, trial, seed, rho, sigma, "filtering")
    rec.delta_s = float(entropy_difference(spec, rho, sigma))
    curve = analytic.filtering_entropy_curve(rho, sigma, "gaussian", (1e1, 1e2, 1e3, 1e4))
    slack = min(analytic.filter_bounds(rho, sigma, analytic.FilterSpec("gaussian", P)).slack
                for P in (1.0, 2.0, 4.0))
    rec.metric = abs(curve.final_offset)
    rec.tolerance = 1e-4
    rec.passed = rec.metric <= rec.tolerance and slack >= -1e-8
    return rec


def _hirschman_trial(config, trial, seed, rng):
    spec = config.blocks
    rho, sigma = random_state(spec.n, seed=rng), random_state(spec.n, seed=rng)
    rec = _base(config, trial, seed, rho, sigma, "hirschman")
    fam = analytic.GammaFamily(spec, rho, sigma)
    rec.metric = min(analytic.hirschman_check(fam, th).gap for th in (0.1, 0.25, 0.4))
    rec.tolerance = -1e-6
    rec.passed = rec.metric >= rec.tolerance
    return rec


def _xi_trial(config, trial, seed, rng):
    spec = config.blocks
    rho, sigma = random_state(spec.n, seed=rng), random_state(spec.n, seed=rng)
    rec = _base(config, trial, seed, rho, sigma, "xi")
    rep = analytic.xi_gap(spec, rho, sigma)
    rec.delta_s = rep.delta_s
    rec.metric = float(rep.residuals[-1])
    rec.tolerance = math.nan
    mins = rep.tau_minima
    rec.passed = bool(np.all(np.diff(mins) <= 1e-15) and np.all(np.isfinite(rep.residuals)))
    return rec


def _run_trial(config, trial, seed, rng):
    start = time.perf_counter()
    name = config.experiment
    if name in ("thm1", "thm2"):
        rec = _recovery_trial(config, trial, seed, rng, name)
    elif name == "firstlaw":
        rec = _firstlaw_trial(config, trial, seed, rng)
    elif name == "filtering":
        rec = _filtering_trial(config, trial, seed, rng)
    elif name == "hirschman":
        rec = _hirschman_trial(config, trial, seed, rng)
    else:
        rec = _xi_trial(config, trial, seed, rng)
    rec.wall_time = time.perf_counter() - start
    return rec


def thread_count():
    raw = os.environ.get("MRLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"MRLAB_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


@dataclass
class Summary:
    total: int
    flagged: int
    violations: int

    @property
    def exit_code(self):
        return 2 if self.violations else 0


def run(config, threads=None):
    """Run an experiment and return ``(exit_code, records)``.

    Flagged records (clamped or regularized) are counted separately and do
    not affect the exit code.
    """
    if config.experiment == "suite":
        from .acceptance import run_all

        results = run_all(stream=sys.stdout)
        return (0 if all(r.passed for r in results) else 2), []
    streams = trial_streams(config.seed, config.trials)
    threads = thread_count() if threads is None else threads
    jobs = [(i, s, g) for i, (s, g) in enumerate(streams)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda j: _run_trial(config, *j), jobs))
    else:
        records = [_run_trial(config, *j) for j in jobs]
    records.sort(key=lambda r: r.trial)
    summary = summarize(records)
    return summary.exit_code, records


def summarize(records):
    flagged = sum(r.flagged for r in records)
    violations = sum((not r.passed) and not r.flagged for r in records)
    return Summary(len(records), flagged, violations)


# -- output ---------------------------------------------------------------------------------


def _cell(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def format_records(records, fmt="csv", timing=False):
    """Serialize records; the column set is fixed and versioned."""
    cols = COLUMNS if timing else [c for c in COLUMNS if c != "wall_time"]
    if fmt == "json":
        rows = []
        for r in records:
            d = asdict(r)
            rows.append({c: (None if isinstance(d[c], float) and math.isnan(d[c]) else d[c])
                         for c in cols})
        return json.dumps({"format": "modular-recovery-lab v1", "records": rows}, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in records:
        d = asdict(r)
        writer.writerow([_cell(d[c]) for c in cols])
    return buf.getvalue()


def read_records(path):
    """Read a CSV or JSON file written by :func:`format_records`."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return json.loads(text)["records"]
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CSV_HEADER):
        raise UsageError(f"{path}: missing '{CSV_HEADER}' header")
    return list(csv.DictReader(lines[1:]))


# -- configuration --------------------------------------------------------------------------

KEYS = ("blocks", "trials", "seed", "nodes", "tclamp", "scheme", "eps", "out", "format",
        "rank_policy", "timing")


def parse_config_file(path):
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise UsageError(f"{path}:{num}: unknown key {key!r}")
        out[key] = value
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="mrlab", description="Ensemble checks of recovery and entropy inequalities.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--blocks", help="inclusion blocks, e.g. 2x2 or 2x2,1x3 (MxK: M×M matrices, K copies)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nodes", type=int, help="quadrature node count")
    p.add_argument("--tclamp", type=float, help="largest |t| evaluated")
    p.add_argument("--scheme", choices=SCHEMES, help="quadrature scheme")
    p.add_argument("--eps", type=float, help="regularization weight for near-singular sigma")
    p.add_argument("--rank-policy", dest="rank_policy", help="full, random or an integer rank")
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--timing", action="store_true", default=None, help="include wall_time column")
    return p


def config_from_args(argv):
    args = build_parser().parse_args(argv)
    merged = parse_config_file(args.config) if args.config else {}
    for key in KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    try:
        quad = QuadratureSpec(int(merged.get("nodes", 48)), float(merged.get("tclamp", 6.0)),
                              merged.get("scheme", "tanh-legendre"))
        timing = merged.get("timing", False)
        if isinstance(timing, str):
            timing = timing.lower() in ("1", "true", "yes")
        return ExperimentConfig(
            experiment=args.experiment,
            blocks=InclusionSpec.parse(str(merged.get("blocks", "2x2"))),
            trials=int(merged.get("trials", 100)),
            seed=int(merged.get("seed", 0)),
            rank_policy=str(merged.get("rank_policy", "random")),
            quadrature=quad,
            eps=float(merged.get("eps", 1e-8)),
            out=merged.get("out"),
            format=str(merged.get("format", "csv")),
            timing=bool(timing),
        )
    except UsageError:
        raise
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = config_from_args(argv)
        code, records = run(config)
        if config.experiment != "suite":
            text = format_records(records, config.format, config.timing)
            if config.out:
                try:
                    with open(config.out, "w", encoding="utf-8", newline="") as fh:
                        fh.write(text)
                except OSError as exc:
                    raise UsageError(f"cannot write {config.out}: {exc}") from exc
            else:
                sys.stdout.write(text)
            s = summarize(records)
            print(f"mrlab {config.experiment}: {s.total} trials, {s.violations} violations, "
                  f"{s.flagged} flagged (excluded)", file=sys.stderr)
        return code
    except UsageError as exc:
        print(f"mrlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
