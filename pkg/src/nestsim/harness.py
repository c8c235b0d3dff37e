"""Parameter sweeps over (n, k) cells and scaling-law fits.

A sweep runs a fixed number of seeded trials per cell, summarizes rounds to
convergence, and emits a versioned CSV.  Trial streams are derived from
(master seed, n, k, trial index), so cells are independent and the CSV is
byte-identical across repeated invocations.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, fields

import numpy as np

from .config import ColonyConfig, make_qualities
from .engine import run, stream_from_key

CSV_SCHEMA = "# nestsim-sweep-csv v1"

COLUMNS = [
    "algorithm",
    "n",
    "k",
    "trials",
    "converged",
    "median_rounds",
    "mean_rounds",
    "p10_rounds",
    "p90_rounds",
    "min_rounds",
    "max_rounds",
]


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    algorithm: str
    n_values: tuple
    k_values: tuple
    pattern: str = "all-good"
    trials: int = 100
    seed: int = 0
    max_rounds: int = 0

    def __post_init__(self):
        if not self.n_values:
            raise ValueError("n_values must be non-empty")
        if not self.k_values:
            raise ValueError("k_values must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    n: int
    k: int
    trials: int
    converged: int
    median_rounds: float
    mean_rounds: float
    p10_rounds: float
    p90_rounds: float
    min_rounds: int
    max_rounds: int


def run_cell(spec: ExperimentSpec, n: int, k: int) -> SummaryRow:
    rounds = []
    converged = 0
    for t in range(spec.trials):
        rng = stream_from_key(spec.seed, n, k, t)
        qualities = make_qualities(k, spec.pattern, rng)
        config = ColonyConfig(
            n=n,
            k=k,
            qualities=qualities,
            seed=spec.seed,
            algorithm=spec.algorithm,
            max_rounds=spec.max_rounds,
        )
        _trace, report = run(config, rng=rng)
        if report.converged:
            converged += 1
            rounds.append(report.rounds_to_converge)
    if rounds:
        arr = np.asarray(rounds, dtype=np.float64)
        stats = dict(
            median_rounds=float(np.median(arr)),
            mean_rounds=float(arr.mean()),
            p10_rounds=float(np.percentile(arr, 10)),
            p90_rounds=float(np.percentile(arr, 90)),
            min_rounds=int(arr.min()),
            max_rounds=int(arr.max()),
        )
    else:
        stats = dict(
            median_rounds=math.nan,
            mean_rounds=math.nan,
            p10_rounds=math.nan,
            p90_rounds=math.nan,
            min_rounds=0,
            max_rounds=0,
        )
    return SummaryRow(
        algorithm=spec.algorithm,
        n=n,
        k=k,
        trials=spec.trials,
        converged=converged,
        **stats,
    )


def sweep(spec: ExperimentSpec) -> list:
    """Run all (n, k) cells in deterministic order."""
    return [run_cell(spec, n, k) for n in spec.n_values for k in spec.k_values]


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_SCHEMA + "\n")
    buf.write(",".join(COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(getattr(row, c)) for c in COLUMNS) + "\n")
    return buf.getvalue()


def csv_to_rows(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        return []
    header = lines[0].split(",")
    if header != COLUMNS:
        raise FitError(f"unexpected CSV columns {header}")
    types = {f.name: f.type for f in fields(SummaryRow)}
    rows = []
    for ln in lines[1:]:
        values = ln.split(",")
        kwargs = {}
        for name, raw in zip(COLUMNS, values):
            kwargs[name] = raw if types[name] == "str" else (
                int(raw) if types[name] == "int" else float(raw)
            )
        rows.append(SummaryRow(**kwargs))
    return rows


def fit_scaling(rows, model: str):
    """Least-squares fit of median rounds against log2(n) or k*log2(n).

    Ordinary least squares with an intercept.  Returns (a, b, r_squared)
    for median_rounds ~= a * regressor + b.  A constant response has
    R^2 = 0 by convention (the regressor explains nothing).
    """
    if model not in ("logn", "klogn"):
        raise FitError("model must be 'logn' or 'klogn'")
    rows = [r for r in rows if not math.isnan(r.median_rounds)]
    if len(rows) < 3:
        raise FitError("need at least 3 rows with converged trials")
    x = np.asarray(
        [
            math.log2(r.n) * (r.k if model == "klogn" else 1)
            for r in rows
        ]
    )
    y = np.asarray([r.median_rounds for r in rows])
    if np.allclose(x, x[0]):
        raise FitError("degenerate design: regressor is constant")
    a, b = np.polyfit(x, y, 1)
    ss_res = float(((y - (a * x + b)) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(a), float(b), r2
