"""Experiment harness: seeded run matrices, CSV persistence, comparisons.

Runs every (problem, algorithm, seed) cell of an experiment, storing one
result row and one convergence log per cell (written atomically so cells
are resumable and safe under concurrent workers), then summarizes medians
with Wilcoxon rank-sum symbols against the attention-guided optimizer.
"""

from __future__ import annotations

import configparser
import csv
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.stats import norm, rankdata

from . import __version__
from .core import ConfigurationError, ContractViolation, make_rng
from .ea import VariationConfig, first_front_objectives, nsga2_run
from .indicators import igd, normalized_hv
from .lsmop import make_problem, sample_reference_front
from .optimizer import LmoamConfig, lmoam_run

ALGORITHMS = ("lmoam", "nsga2")
RESULT_FIELDS = (
    "algorithm",
    "problem",
    "m",
    "d",
    "seed",
    "total_evaluations",
    "final_igd",
    "final_hv",
    "wall_time_ms",
)
ENV_OUTPUT_DIR = "LMOAM_OUTPUT_DIR"
ENV_WORKERS = "LMOAM_WORKERS"

_PRESETS = {
    "paper-desk": {"dims": (100, 500), "seed_count": 5},
    "paper-full": {"dims": (100, 500, 1000, 5000), "seed_count": 20},
}

# Exact rank-sum enumeration is only worthwhile for small samples; beyond
# this many combinations the normal approximation takes over.
_EXACT_ENUMERATION_CAP = 200_000


@dataclass
class ExperimentConfig:
    problems: list[tuple[int, int, int]]  # (lsmop id, m, d)
    algorithms: list[str]
    seeds: list[int]
    output_dir: Path
    lmoam: LmoamConfig = field(default_factory=LmoamConfig)
    significance_level: float = 0.05
    workers: int = 1
    reference_points: int = 10_000

    def __post_init__(self) -> None:
        self.output_dir = Path(self.output_dir)
        if not self.problems or not self.algorithms or not self.seeds:
            raise ConfigurationError("problems, algorithms, and seeds must all be nonempty")
        for algorithm in self.algorithms:
            if algorithm not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm '{algorithm}'")
        if not 0.0 < self.significance_level < 1.0:
            raise ConfigurationError("significance level must lie strictly in (0, 1)")
        if self.workers < 1:
            raise ConfigurationError("worker count must be at least 1")
        if self.reference_points < 1:
            raise ConfigurationError("reference front size must be positive")

    def cells(self) -> list[tuple[tuple[int, int, int], str, int]]:
        return [
            (problem, algorithm, seed)
            for problem in self.problems
            for algorithm in self.algorithms
            for seed in self.seeds
        ]


def _parse_problem_tokens(raw: str) -> list[tuple[int, int, int]]:
    problems = []
    for token in raw.replace(",", " ").split():
        parts = token.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"problem token '{token}' is not id:m:d")
        try:
            problems.append((int(parts[0]), int(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise ConfigurationError(f"problem token '{token}' is not numeric") from exc
    return problems


def parse_config(path: str | Path) -> ExperimentConfig:
    """Load an experiment from a `key = value` file with [section] headers."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from exc

    exp = parser["experiment"] if parser.has_section("experiment") else {}
    preset_name = exp.get("preset", "").strip()
    problems: list[tuple[int, int, int]] = []
    seeds: list[int] = []
    if preset_name:
        if preset_name not in _PRESETS:
            raise ConfigurationError(f"unknown preset '{preset_name}'")
        preset = _PRESETS[preset_name]
        problems = [
            (pid, 3, dim) for pid in range(1, 10) for dim in preset["dims"]
        ]
        seeds = list(range(1, preset["seed_count"] + 1))
    if "problems" in exp:
        problems = _parse_problem_tokens(exp["problems"])
    if "seeds" in exp:
        seeds = [int(tok) for tok in exp["seeds"].replace(",", " ").split()]
    elif "seed_base" in exp or "seed_count" in exp:
        base = int(exp.get("seed_base", 1))
        count = int(exp.get("seed_count", 20))
        seeds = list(range(base, base + count))
    elif not seeds:
        seeds = list(range(1, 21))
    algorithms = exp.get("algorithms", "lmoam nsga2").replace(",", " ").split()

    def _variation() -> VariationConfig:
        if not parser.has_section("variation"):
            return VariationConfig()
        sec = parser["variation"]
        pm_raw = sec.get("mutation_probability", "").strip()
        return VariationConfig(
            crossover_probability=sec.getfloat("crossover_probability", 1.0),
            crossover_distribution_index=sec.getfloat("crossover_distribution_index", 20.0),
            mutation_probability=float(pm_raw) if pm_raw else None,
            mutation_distribution_index=sec.getfloat("mutation_distribution_index", 20.0),
        )

    variation = _variation()
    lm = parser["lmoam"] if parser.has_section("lmoam") else {}
    try:
        lmoam_cfg = LmoamConfig(
            population_size=int(lm.get("population_size", 300)),
            total_budget=int(lm.get("total_budget", 100_000)),
            inner_budget_fraction=float(lm.get("inner_budget_fraction", 0.05)),
            query_dimension=int(lm.get("query_dimension", 5)),
            query_count=int(lm.get("query_count", 20)),
            variation=variation,
            checkpoint_interval=int(lm.get("checkpoint_interval", 1000)),
        )
    except ValueError as exc:
        raise ConfigurationError(f"invalid optimizer setting: {exc}") from exc

    output_dir = os.environ.get(ENV_OUTPUT_DIR) or exp.get("output_dir", "results")
    workers_raw = os.environ.get(ENV_WORKERS) or exp.get("workers", "1")
    try:
        workers = int(workers_raw)
        significance = float(exp.get("significance_level", 0.05))
        reference_points = int(exp.get("reference_points", 10_000))
    except ValueError as exc:
        raise ConfigurationError(f"invalid experiment setting: {exc}") from exc

    return ExperimentConfig(
        problems=problems,
        algorithms=algorithms,
        seeds=seeds,
        output_dir=Path(output_dir),
        lmoam=lmoam_cfg,
        significance_level=significance,
        workers=workers,
        reference_points=reference_points,
    )


def _fmt(value: float) -> str:
    return f"{value:.5e}"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _cell_stem(problem: tuple[int, int, int], algorithm: str, seed: int) -> str:
    pid, m, d = problem
    return f"LSMOP{pid}_m{m}_d{d}_{algorithm}_seed{seed}"


@lru_cache(maxsize=32)
def _cached_front(problem_id: int, m: int, n_points: int):
    return sample_reference_front(problem_id, m, n_points)


def run_cell(
    problem_spec: tuple[int, int, int],
    algorithm: str,
    seed: int,
    lmoam_cfg: LmoamConfig,
    reference_points: int,
    output_dir: Path,
) -> None:
    """Execute one experiment cell and persist its row and convergence log."""
    pid, m, d = problem_spec
    stem = _cell_stem(problem_spec, algorithm, seed)
    cell_path = output_dir / "cells" / f"{stem}.csv"
    conv_path = output_dir / "convergence" / f"{stem}.csv"
    if cell_path.exists() and conv_path.exists():
        return
    problem = make_problem(pid, m, d)
    reference = _cached_front(pid, m, reference_points)
    metric = lambda front: igd(front, reference)  # noqa: E731

    started = time.monotonic()
    if algorithm == "lmoam":
        pop, record = lmoam_run(problem, lmoam_cfg, seed=seed, metric=metric)
    elif algorithm == "nsga2":
        pop, record = nsga2_run(
            problem,
            n=lmoam_cfg.population_size,
            budget=lmoam_cfg.total_budget,
            rng=make_rng(seed),
            cfg=lmoam_cfg.variation,
            checkpoint_interval=lmoam_cfg.checkpoint_interval,
            metric=metric,
        )
    else:
        raise ConfigurationError(f"unknown algorithm '{algorithm}'")
    wall_ms = (time.monotonic() - started) * 1000.0

    front = first_front_objectives(pop)
    row = {
        "algorithm": algorithm,
        "problem": f"LSMOP{pid}",
        "m": m,
        "d": d,
        "seed": seed,
        "total_evaluations": record.total_evaluations,
        "final_igd": _fmt(igd(front, reference)),
        "final_hv": _fmt(normalized_hv(front, reference)),
        "wall_time_ms": _fmt(wall_ms),
    }
    lines = ["evaluations,igd,elapsed_ms"]
    lines += [
        f"{cp.evaluations},{_fmt(cp.igd)},{_fmt(cp.elapsed_ms)}" for cp in record.checkpoints
    ]
    _atomic_write(conv_path, "\n".join(lines) + "\n")
    header = ",".join(RESULT_FIELDS)
    values = ",".join(str(row[field]) for field in RESULT_FIELDS)
    _atomic_write(cell_path, f"{header}\n{values}\n")


def _run_cell_task(args) -> str:
    run_cell(*args)
    return _cell_stem(args[0], args[1], args[2])


def run_experiment(cfg: ExperimentConfig) -> Path:
    """Run every cell of the experiment matrix and assemble results.csv.

    Cells whose files already exist are skipped, so reruns over a completed
    directory recompute nothing and leave every byte unchanged.
    """
    out = cfg.output_dir
    try:
        (out / "cells").mkdir(parents=True, exist_ok=True)
        (out / "convergence").mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"output directory is not writable: {exc}") from exc

    manifest = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "problems": [list(p) for p in cfg.problems],
        "algorithms": list(cfg.algorithms),
        "seeds": list(cfg.seeds),
        "significance_level": cfg.significance_level,
        "reference_points": cfg.reference_points,
        "lmoam": asdict(cfg.lmoam),
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    tasks = [
        (problem, algorithm, seed, cfg.lmoam, cfg.reference_points, out)
        for problem, algorithm, seed in cfg.cells()
    ]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(_run_cell_task, tasks))
    else:
        for task in tasks:
            _run_cell_task(task)

    rows = []
    for problem, algorithm, seed in cfg.cells():
        cell_path = out / "cells" / f"{_cell_stem(problem, algorithm, seed)}.csv"
        lines = cell_path.read_text(encoding="utf-8").strip().splitlines()
        rows.append(lines[1])
    header = ",".join(RESULT_FIELDS)
    _atomic_write(out / "results.csv", "\n".join([header] + sorted(rows)) + "\n")
    return out / "results.csv"


def read_results(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as handle:
        return [dict(row) for row in csv.DictReader(handle)]


def canonicalize_results(path: str | Path) -> str:
    """results.csv content with the wall-time column blanked for comparison."""
    rows = read_results(path)
    fields = [f for f in RESULT_FIELDS if f != "wall_time_ms"]
    lines = [",".join(fields)]
    lines += [",".join(str(row[f]) for f in fields) for row in rows]
    return "\n".join(lines) + "\n"


def wilcoxon_rank_sum(a, b, alpha: float = 0.05, lower_is_better: bool = True) -> str:
    """Two-sided rank-sum comparison symbol for sample `a` against `b`.

    "+" when a is significantly better at level alpha, "-" when worse,
    "=" otherwise. Small samples use exact enumeration of the rank-sum
    distribution; larger ones the tie-corrected normal approximation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ContractViolation("both samples must be nonempty")
    n1, n2 = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    observed = ranks[:n1].sum()
    mean = n1 * (n1 + n2 + 1) / 2.0

    exact = min(n1, n2) < 8 and math.comb(n1 + n2, n1) <= _EXACT_ENUMERATION_CAP
    if exact:
        deviation = abs(observed - mean)
        hits = 0
        total = 0
        for combo in itertools.combinations(range(n1 + n2), n1):
            total += 1
            if abs(ranks[list(combo)].sum() - mean) >= deviation - 1e-9:
                hits += 1
        p_value = hits / total
    else:
        ties = np.unique(pooled, return_counts=True)[1]
        n = n1 + n2
        tie_term = float((ties**3 - ties).sum()) / (n * (n - 1))
        variance = n1 * n2 / 12.0 * ((n + 1) - tie_term)
        if variance <= 0:
            p_value = 1.0
        else:
            z = (observed - mean) / math.sqrt(variance)
            p_value = 2.0 * float(norm.sf(abs(z)))

    if p_value >= alpha:
        return "="
    a_has_lower_values = observed < mean
    a_is_better = a_has_lower_values if lower_is_better else not a_has_lower_values
    return "+" if a_is_better else "-"


@dataclass
class ComparisonCell:
    """One summary-table entry for an algorithm on one (problem, d) row.

    `symbol` compares the algorithm's sample against the lmoam sample on
    the same row ("" when no comparison applies); `best_flag` marks the
    best median in the row (the CSV rendering stays `median(SYMBOL)`, so
    the flag is API-only).
    """

    median_value: float
    symbol: str
    best_flag: bool


def _expected_grid(results_dir: Path, rows: list[dict]):
    manifest_path = results_dir / "manifest.json"
    if manifest_path.is_file():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        problems = [tuple(p) for p in manifest["problems"]]
        algorithms = list(manifest["algorithms"])
        seeds = list(manifest["seeds"])
        return problems, algorithms, seeds
    problems = sorted(
        {(int(r["problem"][5:]), int(r["m"]), int(r["d"])) for r in rows}
    )
    algorithms = sorted({r["algorithm"] for r in rows})
    seeds = sorted({int(r["seed"]) for r in rows})
    return problems, algorithms, seeds


def comparison_cells(
    rows: list[dict],
    problems,
    algorithms,
    seeds,
    value_field: str,
    lower_is_better: bool,
    alpha: float,
) -> dict[tuple[int, int, int], dict[str, ComparisonCell | None]]:
    """Structured summary cells per (problem, d) row; None marks absence.

    Symbols are computed only when the lmoam baseline and another
    algorithm are both present with full same-sized samples.
    """
    by_cell: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row["problem"], int(row["m"]), int(row["d"]), row["algorithm"])
        by_cell.setdefault(key, []).append(float(row[value_field]))
    compare = "lmoam" in algorithms and len(algorithms) > 1
    table: dict[tuple[int, int, int], dict[str, ComparisonCell | None]] = {}
    for pid, m, d in problems:
        name = f"LSMOP{pid}"
        base = by_cell.get((name, m, d, "lmoam"), [])
        line: dict[str, ComparisonCell | None] = {}
        for algorithm in algorithms:
            sample = by_cell.get((name, m, d, algorithm), [])
            if len(sample) != len(seeds) or not sample:
                line[algorithm] = None
                continue
            symbol = ""
            if compare and len(base) == len(seeds):
                symbol = (
                    "="
                    if algorithm == "lmoam"
                    else wilcoxon_rank_sum(sample, base, alpha, lower_is_better)
                )
            line[algorithm] = ComparisonCell(
                median_value=float(np.median(sample)), symbol=symbol, best_flag=False
            )
        present = [c.median_value for c in line.values() if c is not None]
        if present:
            best = min(present) if lower_is_better else max(present)
            for cell in line.values():
                if cell is not None and cell.median_value == best:
                    cell.best_flag = True
        table[(pid, m, d)] = line
    return table


def _median_table(
    rows: list[dict],
    problems,
    algorithms,
    seeds,
    value_field: str,
    lower_is_better: bool,
    alpha: float,
) -> tuple[list[list[str]], bool]:
    cells = comparison_cells(
        rows, problems, algorithms, seeds, value_field, lower_is_better, alpha
    )
    missing = False
    table = [["problem", "d"] + list(algorithms)]
    tallies = {algorithm: [0, 0, 0] for algorithm in algorithms}
    any_symbols = False
    for pid, m, d in problems:
        line = [f"LSMOP{pid}", str(d)]
        for algorithm in algorithms:
            cell = cells[(pid, m, d)][algorithm]
            if cell is None:
                line.append("absent")
                missing = True
                continue
            rendered = _fmt(cell.median_value)
            if cell.symbol:
                rendered += f"({cell.symbol})"
                tallies[algorithm]["+-=".index(cell.symbol)] += 1
                any_symbols = True
            line.append(rendered)
        table.append(line)
    if any_symbols:
        tally_line = ["(+/-/=)", ""]
        for algorithm in algorithms:
            plus, minus, equal = tallies[algorithm]
            tally_line.append(f"{plus}/{minus}/{equal}")
        table.append(tally_line)
    return table, missing


def summarize(results_dir: str | Path) -> int:
    """Emit comparison tables and median convergence curves.

    Returns 0 when every expected cell was present, 2 when any table cell
    had to be marked absent.
    """
    results_dir = Path(results_dir)
    results_path = results_dir / "results.csv"
    if not results_path.is_file():
        raise FileNotFoundError(f"no results.csv under {results_dir}")
    rows = read_results(results_path)
    problems, algorithms, seeds = _expected_grid(results_dir, rows)
    manifest_path = results_dir / "manifest.json"
    alpha = 0.05
    if manifest_path.is_file():
        alpha = json.loads(manifest_path.read_text(encoding="utf-8")).get(
            "significance_level", 0.05
        )

    missing_any = False
    for value_field, lower_better, out_name in (
        ("final_igd", True, "igd_table.csv"),
        ("final_hv", False, "hv_table.csv"),
    ):
        table, missing = _median_table(
            rows, problems, algorithms, seeds, value_field, lower_better, alpha
        )
        missing_any = missing_any or missing
        _atomic_write(
            results_dir / out_name, "\n".join(",".join(line) for line in table) + "\n"
        )

    curve_lines = ["problem,d,algorithm,evaluations,median_igd"]
    for pid, m, d in problems:
        for algorithm in algorithms:
            per_seed = []
            for seed in seeds:
                conv = results_dir / "convergence" / (
                    f"{_cell_stem((pid, m, d), algorithm, seed)}.csv"
                )
                if not conv.is_file():
                    continue
                data = np.genfromtxt(conv, delimiter=",", names=True)
                per_seed.append(np.atleast_1d(data))
            if len(per_seed) != len(seeds) or not per_seed:
                missing_any = True
                continue
            evaluations = per_seed[0]["evaluations"]
            stacked = np.stack([curve["igd"] for curve in per_seed])
            medians = np.median(stacked, axis=0)
            curve_lines += [
                f"LSMOP{pid},{d},{algorithm},{int(ev)},{_fmt(med)}"
                for ev, med in zip(evaluations, medians)
            ]
    _atomic_write(results_dir / "median_convergence.csv", "\n".join(curve_lines) + "\n")
    return 2 if missing_any else 0
