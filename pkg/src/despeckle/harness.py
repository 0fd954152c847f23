"""Monte Carlo protocol: phantom -> speckle -> filters -> metrics -> CSV.

Four canonical situations pair a look count with strip/background means:

    #1  L=1  strip 200  background 70
    #2  L=3  strip 195  background 55
    #3  L=5  strip 150  background 30
    #4  L=7  strip 170  background 35

Every (situation, replicate) owns an RNG stream keyed by
(master seed, situation id, replicate), so all filters of a replicate see
the same corrupted image and reruns are reproducible for any thread count.
Rows are sorted before writing, making the CSV byte-stable.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .divergence import TestConfig
from .errors import DomainError, InvalidArgumentError
from .gamma import unit_speckle
from .lee import LeeSpec, lee_filter
from .metrics import MetricReport, compute_report
from .nmfilter import FilterSpec, filter_image
from .phantom import PhantomGeometry, default_geometry, render_phantom
from .raster import Raster


class Situation(NamedTuple):
    id: int
    looks: float
    strip_mean: float
    background_mean: float


SITUATIONS = {
    1: Situation(1, 1.0, 200.0, 70.0),
    2: Situation(2, 3.0, 195.0, 55.0),
    3: Situation(3, 5.0, 150.0, 30.0),
    4: Situation(4, 7.0, 170.0, 35.0),
}

TEST_KINDS = ("hellinger", "kl", "renyi")
FILTER_KINDS = ("input", "lee") + TEST_KINDS

CSV_COLUMNS = (
    "filter",
    "window",
    "level",
    "situation",
    "replicate",
    "enl",
    "line_contrast_error",
    "edge_gradient",
    "edge_variance",
    "q_mean",
    "q_std",
    "beta_rho",
)

DEFAULT_FILTERS = (
    ("input", None),
    ("lee", 5),
    ("lee", 7),
    ("hellinger", 5),
    ("hellinger", 7),
)


def make_phantom(geom: PhantomGeometry, sit: Situation) -> Raster:
    """Noiseless phantom for one situation: features bright, rest background."""
    return render_phantom(geom, sit.strip_mean, sit.background_mean)


def replicate_stream(master_seed: int, situation_id: int, replicate: int) -> np.random.Generator:
    """The RNG stream owned by one (situation, replicate) pair."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((master_seed, situation_id, replicate)))
    )


def corrupt(phantom: Raster, sit: Situation, stream: np.random.Generator) -> Raster:
    """Multiply by unit-mean L-look speckle: each pixel ~ Gamma(L, L/value)."""
    if phantom.array.min() <= 0:
        raise DomainError("phantom must be strictly positive to corrupt")
    return Raster(phantom.array * unit_speckle(sit.looks, phantom.shape, stream))


@dataclass(frozen=True)
class RunPlan:
    situations: tuple = (1, 2, 3, 4)
    replicates: int = 100
    filters: tuple = DEFAULT_FILTERS
    levels: tuple = (0.2,)
    master_seed: int = 0
    size: int = 128
    dof: int = 1
    shared_looks: str = "pooled"
    renyi_order: float = 0.5

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidArgumentError("replicates must be >= 1")
        if not self.filters:
            raise InvalidArgumentError("at least one filter is required")
        for kind, window in self.filters:
            if kind not in FILTER_KINDS:
                raise InvalidArgumentError(f"unknown filter kind {kind!r}")
            if kind != "input" and window not in (5, 7):
                raise InvalidArgumentError(f"filter {kind!r} needs window 5 or 7")
        for level in self.levels:
            if not 0.0 < level < 1.0:
                raise InvalidArgumentError("levels must lie in (0, 1)")
        if not self.levels:
            raise InvalidArgumentError("at least one significance level is required")
        for sid in self.situations:
            if sid not in SITUATIONS:
                raise InvalidArgumentError(f"unknown situation {sid}")


def fast_plan(master_seed: int = 0, **overrides) -> RunPlan:
    """The CI-sized profile: 64x64 phantom, 20 replicates."""
    overrides.setdefault("size", 64)
    overrides.setdefault("replicates", 20)
    return RunPlan(master_seed=master_seed, **overrides)


def _apply_filter(kind, window, corrupted, sit, level, plan, threads):
    if kind == "input":
        return corrupted
    if kind == "lee":
        return lee_filter(corrupted, LeeSpec(window=window, nominal_looks=sit.looks))
    cfg = TestConfig(
        kind=kind,
        renyi_order=plan.renyi_order,
        alpha=level,
        num_tests=8,
        dof=plan.dof,
        shared_looks=plan.shared_looks,
    )
    return filter_image(corrupted, FilterSpec(window=window, test=cfg), threads=threads)


def _replicate_rows(plan, geom, phantoms, sid, rep):
    sit = SITUATIONS[sid]
    phantom = phantoms[sid]
    corrupted = corrupt(phantom, sit, replicate_stream(plan.master_seed, sid, rep))
    rows = []
    for kind, window in plan.filters:
        level_dependent = kind in TEST_KINDS
        cached = None
        for level in plan.levels:
            if level_dependent or cached is None:
                filtered = _apply_filter(kind, window, corrupted, sit, level, plan, threads=1)
                if not level_dependent:
                    cached = filtered
            else:
                filtered = cached
            report = compute_report(phantom, filtered, geom)
            rows.append(
                {
                    "filter": kind,
                    "window": window,
                    "level": level,
                    "situation": sid,
                    "replicate": rep,
                    "report": report,
                }
            )
    return rows


def run_protocol(plan: RunPlan, geom: PhantomGeometry | None = None, threads: int = 1) -> list:
    """Execute the plan and return unsorted result rows (dicts).

    Replicates are independent tasks; `threads` only controls how they are
    scheduled, never the numbers produced.
    """
    if geom is None:
        geom = default_geometry(plan.size)
    if geom.size != plan.size:
        raise InvalidArgumentError("geometry size does not match the plan")
    phantoms = {sid: make_phantom(geom, SITUATIONS[sid]) for sid in plan.situations}
    tasks = [(sid, rep) for sid in plan.situations for rep in range(plan.replicates)]
    if threads <= 1:
        chunks = [_replicate_rows(plan, geom, phantoms, sid, rep) for sid, rep in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(
                pool.map(lambda t: _replicate_rows(plan, geom, phantoms, *t), tasks)
            )
    return [row for chunk in chunks for row in chunk]


def _row_sort_key(row):
    return (
        row["filter"],
        "" if row["window"] is None else str(row["window"]),
        repr(float(row["level"])),
        row["situation"],
        row["replicate"],
    )


def _row_to_csv(row) -> str:
    report: MetricReport = row["report"]
    cells = [
        row["filter"],
        "NA" if row["window"] is None else str(row["window"]),
        repr(float(row["level"])),
        str(row["situation"]),
        str(row["replicate"]),
    ]
    for name in CSV_COLUMNS[5:]:
        value = getattr(report, name)
        cells.append("NA" if value is None else repr(float(value)))
    return ",".join(cells)


def write_csv(rows: list, path, comments: tuple = ()) -> None:
    """Sort rows deterministically and write them under the fixed header."""
    ordered = sorted(rows, key=_row_sort_key)
    with open(path, "w") as fh:
        for comment in comments:
            fh.write(f"# {comment}\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in ordered:
            fh.write(_row_to_csv(row) + "\n")


def read_csv_rows(path) -> list:
    """Parse a harness CSV back into dicts of strings (comments skipped)."""
    out = []
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            out.append(dict(zip(header, line.split(","))))
    return out
