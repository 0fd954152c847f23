"""Nagao-Matsuyama window geometry and the test-guided averaging filter.

Each pixel is filtered from its 5x5 or 7x7 neighbourhood, which carries nine
sub-regions: a central block (region 1, holding the pixel itself) and eight
oriented regions pointing at the compass directions.  Every oriented region
is tested against the central block for distributional agreement; the output
pixel is the mean over the window cells covered by region 1 together with
the regions that were not rejected, each cell counted once.  When all eight
are rejected the central block alone survives, which is what preserves
edges and point targets.

The oriented regions follow the classical Nagao-Matsuyama layout: 7 offsets
each in the 5x5 window (12 in the 7x7), including the centre pixel, so they
overlap the central block and their neighbours.  The full table is generated
by rotating one hand-authored north region and one north-east region by 90
degrees, which maps N->E->S->W and NE->SE->SW->NW; together the nine regions
cover every cell of the window.  Run ``despeckle masks --window 5`` for a
diagram.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .divergence import (
    TestConfig,
    hellinger_stat_array,
    kl_stat_array,
    renyi_stat_array,
    run_test,
    sidak_level,
)
from .errors import InvalidArgumentError, OutOfBoundsError
from .gamma import mle, solve_looks
from .raster import Raster, pad_mirror

REGION_NAMES = (
    "center",
    "north",
    "northeast",
    "east",
    "southeast",
    "south",
    "southwest",
    "west",
    "northwest",
)


@dataclass(frozen=True)
class RegionMask:
    region_id: int
    offsets: tuple


def _rot90cw(offsets):
    """Rotate an offset set a quarter turn clockwise: (r, c) -> (c, -r)."""
    return tuple((c, -r) for r, c in offsets)


# Hand-authored seed regions; everything else is rotation-generated.
_N_SEED = {
    5: ((-2, -1), (-2, 0), (-2, 1), (-1, -1), (-1, 0), (-1, 1), (0, 0)),
    7: (
        (-3, -2), (-3, -1), (-3, 0), (-3, 1), (-3, 2),
        (-2, -2), (-2, -1), (-2, 0), (-2, 1), (-2, 2),
        (-1, 0), (0, 0),
    ),
}
_NE_SEED = {
    5: ((0, 0), (-1, 0), (0, 1), (-1, 1), (-2, 1), (-1, 2), (-2, 2)),
    7: (
        (0, 0), (-1, 0), (0, 1), (-1, 1), (-2, 1), (-1, 2), (-2, 2),
        (-3, 1), (-3, 2), (-3, 3), (-2, 3), (-1, 3),
    ),
}


def nm_masks(window: int) -> tuple:
    """The nine committed region masks for a 5x5 or 7x7 window."""
    if window not in (5, 7):
        raise InvalidArgumentError(f"window must be 5 or 7, got {window}")
    half = window // 2
    center_half = half - 1
    center = tuple(
        (r, c)
        for r in range(-center_half, center_half + 1)
        for c in range(-center_half, center_half + 1)
    )
    north = _N_SEED[window]
    northeast = _NE_SEED[window]
    east = _rot90cw(north)
    south = _rot90cw(east)
    west = _rot90cw(south)
    southeast = _rot90cw(northeast)
    southwest = _rot90cw(southeast)
    northwest = _rot90cw(southwest)
    ordered = (center, north, northeast, east, southeast, south, southwest, west, northwest)
    masks = tuple(RegionMask(i + 1, offs) for i, offs in enumerate(ordered))
    _check_table(masks, window)
    return masks


def _check_table(masks, window):
    half = window // 2
    peripheral = 7 if window == 5 else 12
    central = (window - 2) ** 2
    assert len(masks[0].offsets) == central
    covered = set(masks[0].offsets)
    for mask in masks[1:]:
        assert len(mask.offsets) == peripheral
        assert len(set(mask.offsets)) == peripheral
        covered.update(mask.offsets)
    for mask in masks:
        for r, c in mask.offsets:
            assert abs(r) <= half and abs(c) <= half
    # the nine regions jointly cover the whole window
    assert len(covered) == window * window


def mask_table_text(window: int) -> str:
    """Human-readable dump of the committed mask table.

    One grid cell lists every region id that contains it (the oriented
    regions overlap the central block and one another).
    """
    masks = nm_masks(window)
    half = window // 2
    grid = {}
    for mask in masks:
        for off in mask.offsets:
            grid.setdefault(off, []).append(mask.region_id)
    cells = {off: ",".join(str(i) for i in ids) for off, ids in grid.items()}
    width = max(len(s) for s in cells.values())
    lines = [f"window {window}x{window}: region ids per cell (row, col from top-left)"]
    for r in range(-half, half + 1):
        lines.append(" ".join(cells[(r, c)].rjust(width) for c in range(-half, half + 1)))
    lines.append("")
    for mask in masks:
        name = REGION_NAMES[mask.region_id - 1]
        lines.append(f"region {mask.region_id} ({name}, {len(mask.offsets)} px): "
                     + " ".join(f"({r},{c})" for r, c in mask.offsets))
    return "\n".join(lines)


@dataclass(frozen=True)
class FilterSpec:
    window: int = 5
    test: TestConfig = field(default_factory=TestConfig)
    masks: tuple = None

    def __post_init__(self):
        if self.window not in (5, 7):
            raise InvalidArgumentError(f"window must be 5 or 7, got {self.window}")
        if self.test.num_tests != 8:
            raise InvalidArgumentError("the filter runs 8 tests; test.num_tests must be 8")
        if self.masks is None:
            object.__setattr__(self, "masks", nm_masks(self.window))


# ---------------------------------------------------------------------------
# engine
#
# One code path serves both the scalar filter_pixel and the row-parallel
# filter_image so the two agree bit for bit.  Windows containing exact
# zeros fall back to the sample-level mle (which shifts zeros), everything
# else runs vectorized.


def _plan(spec: FilterSpec):
    half = spec.window // 2
    cells = [(r, c) for r in range(-half, half + 1) for c in range(-half, half + 1)]
    index = {off: i for i, off in enumerate(cells)}
    gathers = [np.array([index[off] for off in m.offsets]) for m in spec.masks]
    indicators = np.zeros((9, len(cells)), dtype=bool)
    for i, m in enumerate(spec.masks):
        indicators[i, [index[off] for off in m.offsets]] = True
    drs = np.array([r for r, _ in cells])
    dcs = np.array([c for _, c in cells])
    return half, drs, dcs, gathers, indicators


def _stat_fn(cfg: TestConfig):
    if cfg.kind == "hellinger":
        return lambda l1, li, m, n, L: hellinger_stat_array(l1, li, m, n, L)
    if cfg.kind == "kl":
        return lambda l1, li, m, n, L: kl_stat_array(l1, li, m, n, L)
    return lambda l1, li, m, n, L: renyi_stat_array(l1, li, m, n, L, cfg.renyi_order)


def _filter_centers(padded: np.ndarray, rows, cols, spec: FilterSpec, plan) -> np.ndarray:
    half, drs, dcs, gathers, indicators = plan
    cfg = spec.test
    eta = sidak_level(cfg.alpha, cfg.num_tests)
    stat = _stat_fn(cfg)
    win = padded[rows[:, None] + half + drs[None, :], cols[:, None] + half + dcs[None, :]]

    out = np.empty(rows.shape, dtype=np.float64)
    clean = ~np.any(win == 0.0, axis=1)
    if not np.all(clean):
        # zero pixels need the per-sample shifting logic of mle
        for k in np.flatnonzero(~clean):
            out[k] = _filter_one_with_zeros(win[k], spec, gathers, indicators)
    if not np.any(clean):
        return out

    w = win[clean]
    logw = np.log(w)
    g1 = gathers[0]
    m1 = g1.size
    sum1 = w[:, g1].sum(axis=1)
    mean1 = w[:, g1].mean(axis=1)
    logsum1 = logw[:, g1].sum(axis=1)
    rhs1 = np.log(mean1) - logsum1 / m1
    degenerate1 = rhs1 <= 0.0
    looks1 = solve_looks(rhs1)

    accepted = np.zeros((w.shape[0], 9), dtype=bool)
    accepted[:, 0] = True
    for i in range(1, 9):
        gi = gathers[i]
        ni = gi.size
        mean_i = w[:, gi].mean(axis=1)
        if cfg.shared_looks == "pooled":
            pooled_mean = (sum1 + w[:, gi].sum(axis=1)) / (m1 + ni)
            pooled_rhs = np.log(pooled_mean) - (logsum1 + logw[:, gi].sum(axis=1)) / (m1 + ni)
            shared = solve_looks(pooled_rhs)
        else:
            shared = looks1
        s = stat(mean1, mean_i, m1, ni, shared)
        p = special.gammaincc(cfg.dof / 2.0, s / 2.0)
        accepted[:, i] = p > eta

    covered = accepted @ indicators.astype(np.float64) > 0
    pooled = (w * covered).sum(axis=1) / covered.sum(axis=1)
    # a constant central block short-circuits to its own mean, tests skipped
    out[clean] = np.where(degenerate1, mean1, pooled)
    return out


def _filter_one_with_zeros(window_cells, spec, gathers, indicators):
    samples = [window_cells[g] for g in gathers]
    fit1 = mle(samples[0])
    if fit1.degenerate:
        return float(samples[0].mean())
    accepted = np.zeros(9, dtype=bool)
    accepted[0] = True
    for i in range(1, 9):
        accepted[i] = not run_test(samples[0], samples[i], spec.test).rejected
    covered = accepted @ indicators.astype(np.float64) > 0
    return float((window_cells * covered).sum() / covered.sum())


def filter_pixel(padded: Raster, center: tuple, spec: FilterSpec) -> float:
    """Filter a single pixel of an already-padded raster."""
    half = spec.window // 2
    row, col = center
    if not (
        half <= row < padded.height - half and half <= col < padded.width - half
    ):
        raise OutOfBoundsError(f"center {center} closer than {half} px to the border")
    plan = _plan(spec)
    # the engine indexes relative to the original image origin
    value = _filter_centers(
        padded.array, np.array([row - half]), np.array([col - half]), spec, plan
    )
    return float(value[0])


def filter_image(img: Raster, spec: FilterSpec, threads: int = 1) -> Raster:
    """Filter every pixel once; mirror padding keeps the output size equal.

    Rows are independent, so `threads` > 1 simply splits them across a
    thread pool; the result is identical for any thread count.
    """
    if img.width < spec.window or img.height < spec.window:
        raise InvalidArgumentError(
            f"image {img.height}x{img.width} smaller than the {spec.window}x{spec.window} window"
        )
    half = spec.window // 2
    padded = pad_mirror(img, half).array
    plan = _plan(spec)
    out = np.empty((img.height, img.width), dtype=np.float64)
    cols = np.arange(img.width)

    def do_row(r):
        out[r] = _filter_centers(padded, np.full(img.width, r), cols, spec, plan)

    if threads <= 1:
        for r in range(img.height):
            do_row(r)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(do_row, range(img.height)))
    return Raster(out)
