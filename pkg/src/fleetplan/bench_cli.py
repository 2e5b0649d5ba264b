"""Benchmark harness: batch runs across maps, robot counts and algorithms,
aggregate success/prolongation tables, and a planning-time scaling probe.

All output is machine-readable CSV; aggregates are recomputed from the raw
per-task CSVs so there is no hidden state between the two.
"""

import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np

from . import SCENARIO_NAMES, scenario_path
from .protocol import MonitorViolation
from .roadmap import check_valid_roadmap, compute_r_bound
from .sim import build_scenario_roadmap, load_scenario, run


def _resolve_map(name: str) -> str:
    if name in SCENARIO_NAMES:
        return scenario_path(name)
    return name


def load_suite(path: str) -> dict:
    with open(path) as f:
        suite = json.load(f)
    for sc in suite["scenarios"]:
        if sc.get("reps", 1) < 1:
            raise ValueError("repetitions must be >= 1")
    suite.setdefault("algorithms", ["COBRA"])
    return suite


def suite_jobs(suite: dict, master_seed: int):
    """Expand a suite into concrete (map, n, algorithm, seed) run specs.
    Seeds are a deterministic function of the master seed and the job's
    position in the expansion."""
    jobs = []
    combo = 0
    for sc in suite["scenarios"]:
        for n in sc["ns"]:
            for algo in suite["algorithms"]:
                for rep in range(sc.get("reps", 1)):
                    jobs.append({
                        "map": sc["map"],
                        "n": n,
                        "algorithm": algo,
                        "seed": master_seed + 10000 * combo + rep,
                    })
                combo += 1
    return jobs


def _run_one(job: dict) -> dict:
    path = _resolve_map(job["map"])
    sc = load_scenario(path, n_robots=job["n"], seed=job["seed"],
                       algorithm=job["algorithm"])
    res = run(sc)
    return {
        "job": job,
        "csv": res.to_csv(),
        "summary": res.summary(),
    }


def _raw_name(job: dict) -> str:
    return "{map}_{algorithm}_n{n}_s{seed}.csv".format(**job)


def aggregate_rows(out_dir: str, jobs):
    """Recompute the aggregate table from the raw CSVs on disk."""
    groups = {}
    for job in jobs:
        key = (job["map"], job["n"], job["algorithm"])
        groups.setdefault(key, []).append(job)
    rows = []
    for (mp, n, algo) in sorted(groups):
        prolongations = []
        done = 0
        total = 0
        for job in groups[(mp, n, algo)]:
            with open(os.path.join(out_dir, _raw_name(job))) as f:
                for rec in csv.DictReader(f):
                    total += 1
                    if rec["outcome"] == "Success":
                        done += 1
                        prolongations.append(float(rec["p"]))
        expected = len(groups[(mp, n, algo)]) * n * 4
        total = max(total, expected)
        mean = float(np.mean(prolongations)) if prolongations else math.nan
        std = float(np.std(prolongations)) if prolongations else math.nan
        rows.append({
            "map": mp, "n": n, "algorithm": algo,
            "runs": len(groups[(mp, n, algo)]),
            "success_rate": done / total if total else math.nan,
            "prolongation_mean": mean,
            "prolongation_std": std,
        })
    return rows


@click.group()
def main():
    """Fleet coordination benchmarks."""


@main.command("run")
@click.option("--suite", "suite_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--jobs", default=1, show_default=True)
def run_cmd(suite_path, out_dir, seed, jobs):
    """Run every scenario in a suite file and write raw + aggregate CSVs."""
    suite = load_suite(suite_path)
    specs = suite_jobs(suite, seed)
    os.makedirs(out_dir, exist_ok=True)
    results = []
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_run_one, specs))
        else:
            results = [_run_one(j) for j in specs]
    except MonitorViolation as exc:
        click.echo(f"invariant monitor violation: {exc}", err=True)
        sys.exit(2)
    for res in results:
        with open(os.path.join(out_dir, _raw_name(res["job"])), "w") as f:
            f.write(res["csv"])
        s = res["summary"]
        click.echo("{map} {algorithm} n={n} seed={seed}".format(**res["job"])
                   + f" success={s['success_rate']:.3f}")
    rows = aggregate_rows(out_dir, [r["job"] for r in results])
    agg_path = os.path.join(out_dir, "aggregate.csv")
    with open(agg_path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    click.echo(f"aggregate written to {agg_path}")


@main.command("validate")
@click.argument("scenario")
def validate_cmd(scenario):
    """Build the roadmap and print the infrastructure validity report."""
    sc = load_scenario(_resolve_map(scenario))
    rm = build_scenario_roadmap(sc)
    report = check_valid_roadmap(rm, sc.infra, sc.robot_radius)
    click.echo(f"valid: {report.valid}")
    click.echo(f"endpoints: {len(sc.infra.endpoints)}")
    click.echo(f"vertices: {len(rm.vertices)}  edges: {len(rm.edges)}")
    click.echo(f"rbar: {report.rbar}  resolution: {report.resolution}")
    if report.valid:
        click.echo(f"r_bound: {compute_r_bound(rm, sc.infra, sc.v_max)}")
    else:
        click.echo(f"failing pairs: {list(report.failing_pairs)}")
        sys.exit(1)


def scaling_table(map_path: str, ns, reps: int = 3, seed: int = 0):
    """Mean per-task planning wall time for each robot count, plus the
    fitted log-log slope."""
    rows = []
    sc0 = load_scenario(map_path)
    rm = build_scenario_roadmap(sc0)
    for n in ns:
        times = []
        for rep in range(reps):
            sc = load_scenario(map_path, n_robots=n, seed=seed + rep)
            res = run(sc, rm=rm)
            times.extend(res.planning_wall_times)
        rows.append({"n": n, "tasks": len(times),
                     "mean_planning_time": float(np.mean(times)),
                     "std_planning_time": float(np.std(times))})
    xs = np.log([r["n"] for r in rows])
    ys = np.log([r["mean_planning_time"] for r in rows])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return rows, slope


@main.command("scaling")
@click.option("--map", "map_path", required=True)
@click.option("--ns", default="2,4,8,16", show_default=True)
@click.option("--reps", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
def scaling_cmd(map_path, ns, reps, seed, out_path):
    """Probe how per-task planning time grows with the robot count."""
    counts = [int(x) for x in ns.split(",")]
    rows, slope = scaling_table(_resolve_map(map_path), counts, reps, seed)
    for r in rows:
        click.echo("n={n:3d}  tasks={tasks:4d}  mean={mean_planning_time:.4f}s"
                   "  std={std_planning_time:.4f}s".format(**r))
    click.echo(f"log-log slope: {slope:.3f}")
    if out_path:
        with open(out_path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]),
                               lineterminator="\n")
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
