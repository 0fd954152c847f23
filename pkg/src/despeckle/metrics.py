"""Image-quality measures, with and without a ground-truth reference.

Ground-truth measures (need the phantom and its geometry): background ENL,
line-contrast deviation, edge gradient/variance deviation, the universal
quality index Q over sliding 8x8 windows, and the correlation between
Laplacians.  Reference-free error measures (need only two images of equal
size): MAE, MSE, NMSE, and DCON on jointly min-max normalized data.

Deviation-style measures compare a value computed on the test image with
the same value computed on the noiseless reference, so for every metric
here except Q and the Laplacian correlation the best value is the
smallest.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dataclass_fields

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateRegionError, DomainError, InvalidArgumentError
from .phantom import PhantomGeometry
from .raster import Raster

Q_WINDOW = 8
DCON_OFFSET = 23.0 / 255.0


def enl(values) -> float:
    """Equivalent number of looks (mean/std)^2 with the unbiased variance."""
    z = np.asarray(values, dtype=np.float64).reshape(-1)
    if z.size < 2:
        raise InvalidArgumentError("ENL needs at least 2 pixels")
    sd = z.std(ddof=1)
    if sd == 0:
        raise DegenerateRegionError("ENL of a constant region")
    return float((z.mean() / sd) ** 2)


def _line_contrast_value(arr: np.ndarray, geom: PhantomGeometry) -> float:
    row, c0, c1 = geom.hline
    line = arr[row, c0:c1]
    above = arr[row - 1, c0:c1]
    below = arr[row + 1, c0:c1]
    return float(2.0 * line.mean() - above.mean() - below.mean())


def line_contrast(img: Raster, geom: PhantomGeometry, reference: Raster) -> float:
    """|contrast(img) - contrast(reference)| for the horizontal line.

    Contrast is twice the line mean minus the means of the two adjacent
    rows.  Zero is perfect: the filtered line sticks out exactly as much
    as the noiseless one.
    """
    _check_same_shape(img, reference)
    if geom.size != img.height or geom.size != img.width:
        raise InvalidArgumentError("geometry size does not match the image")
    return abs(_line_contrast_value(img.array, geom) - _line_contrast_value(reference.array, geom))


def edge_measures(img: Raster, geom: PhantomGeometry, reference: Raster) -> tuple:
    """(gradient, variance) deviations across the block edge.

    gradient(x) = |mean(outside band) - mean(inside band)|, variance is the
    same with unbiased variances; both are reported as absolute deviations
    from the reference values, so smallest is best.
    """
    _check_same_shape(img, reference)
    outside, inside = geom.edge_strips()

    def measures(arr):
        a, b = arr[outside].ravel(), arr[inside].ravel()
        if a.size < 2 or b.size < 2:
            raise DegenerateRegionError("edge strips need at least 2 pixels each")
        return abs(a.mean() - b.mean()), abs(a.var(ddof=1) - b.var(ddof=1))

    g_img, v_img = measures(img.array)
    g_ref, v_ref = measures(reference.array)
    return float(abs(g_img - g_ref)), float(abs(v_img - v_ref))


def _q_window_values(x: np.ndarray, y: np.ndarray):
    wx = sliding_window_view(x, (Q_WINDOW, Q_WINDOW)).reshape(-1, Q_WINDOW * Q_WINDOW)
    wy = sliding_window_view(y, (Q_WINDOW, Q_WINDOW)).reshape(-1, Q_WINDOW * Q_WINDOW)
    n = wx.shape[1]
    mx = wx.mean(axis=1)
    my = wy.mean(axis=1)
    vx = wx.var(axis=1, ddof=1)
    vy = wy.var(axis=1, ddof=1)
    cov = ((wx - mx[:, None]) * (wy - my[:, None])).sum(axis=1) / (n - 1)
    usable = (vx > 0) & (vy > 0) & (mx**2 + my**2 > 0)
    sx = np.sqrt(vx[usable])
    sy = np.sqrt(vy[usable])
    q = (
        (cov[usable] / (sx * sy))
        * (2.0 * mx[usable] * my[usable] / (mx[usable] ** 2 + my[usable] ** 2))
        * (2.0 * sx * sy / (vx[usable] + vy[usable]))
    )
    return q, int(usable.size - usable.sum())


def q_index(x: Raster, y: Raster, with_counts: bool = False):
    """Mean and standard deviation of Q over all sliding 8x8 windows.

    Q multiplies a correlation, a luminance, and a contrast factor and lies
    in [-1, 1] with 1 for a perfect match.  Windows where any factor's
    denominator vanishes (e.g. the reference is locally constant) are
    skipped and counted; with_counts=True appends (used, skipped).
    """
    _check_same_shape(x, y)
    if x.height < Q_WINDOW or x.width < Q_WINDOW:
        raise InvalidArgumentError(f"images must allow one full {Q_WINDOW}x{Q_WINDOW} window")
    q, skipped = _q_window_values(x.array, y.array)
    if q.size == 0:
        raise DegenerateRegionError("every Q window was degenerate")
    result = (float(q.mean()), float(q.std(ddof=0)))
    if with_counts:
        return result + (int(q.size), skipped)
    return result


def _laplacian(arr: np.ndarray) -> np.ndarray:
    padded = np.pad(arr, 1, mode="reflect")
    return (
        padded[:-2, 1:-1]
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
        - 4.0 * arr
    )


def laplacian_correlation(x: Raster, y: Raster) -> float:
    """Pearson correlation between the 4-neighbour Laplacians of x and y.

    An edge-fidelity measure: 1 means the test image's edge structure
    matches the reference exactly (affine intensity changes included).
    """
    _check_same_shape(x, y)
    if x.height < 3 or x.width < 3:
        raise InvalidArgumentError("images must be at least 3x3")
    lx = _laplacian(x.array).ravel()
    ly = _laplacian(y.array).ravel()
    dx = lx - lx.mean()
    dy = ly - ly.mean()
    denom = np.sqrt((dx**2).sum() * (dy**2).sum())
    if denom == 0:
        raise DegenerateRegionError("constant Laplacian, correlation undefined")
    return float((dx * dy).sum() / denom)


def error_metrics(x: Raster, y: Raster) -> tuple:
    """(MAE, MSE, NMSE, DCON) on jointly min-max normalized images.

    Both images are mapped together onto [0, 1] (shared min and max) so the
    gray-level constant in DCON's denominator is meaningful.
    """
    _check_same_shape(x, y)
    ax, ay = x.array, y.array
    lo = min(ax.min(), ay.min())
    hi = max(ax.max(), ay.max())
    if hi == lo:
        raise DegenerateRegionError("joint intensity range is a single value")
    xn = (ax - lo) / (hi - lo)
    yn = (ay - lo) / (hi - lo)
    diff = xn - yn
    mae = float(np.abs(diff).mean())
    mse = float((diff**2).mean())
    ref_energy = float((xn**2).sum())
    if ref_energy == 0:
        raise DomainError("reference image is zero after normalization")
    nmse = float((diff**2).sum() / ref_energy)
    dcon = float((np.abs(diff) / (DCON_OFFSET + xn + yn)).mean())
    return mae, mse, nmse, dcon


def _check_same_shape(x: Raster, y: Raster):
    if x.shape != y.shape:
        raise InvalidArgumentError(f"shape mismatch: {x.shape} vs {y.shape}")


# ---------------------------------------------------------------------------
# bundled report


@dataclass(frozen=True)
class MetricReport:
    """Every metric for one (reference, test) pair; None marks 'not computed'."""

    enl: float | None = None
    line_contrast_error: float | None = None
    edge_gradient: float | None = None
    edge_variance: float | None = None
    q_mean: float | None = None
    q_std: float | None = None
    beta_rho: float | None = None
    mae: float | None = None
    mse: float | None = None
    nmse: float | None = None
    dcon: float | None = None

    def as_csv_row(self) -> str:
        return ",".join(
            "NA" if v is None else repr(float(v))
            for v in (getattr(self, f.name) for f in dataclass_fields(self))
        )


METRIC_HEADER = ",".join(f.name for f in dataclass_fields(MetricReport))


def compute_report(
    reference: Raster, test: Raster, geom: PhantomGeometry | None = None
) -> MetricReport:
    """All metrics of `test` against `reference`; failures become None.

    With a geometry, ENL is taken over the designated background region of
    the test image and the line/edge deviations are computed; without one,
    ENL falls back to the whole image and those three fields stay None.
    """
    _check_same_shape(reference, test)
    values = {}

    def attempt(name, fn):
        try:
            values[name] = fn()
        except Exception:
            values[name] = None

    if geom is not None:
        attempt("enl", lambda: enl(test.array[geom.background_slices()]))
        attempt("line_contrast_error", lambda: line_contrast(test, geom, reference))

        def edges():
            return edge_measures(test, geom, reference)

        attempt("edge_pair", edges)
        pair = values.pop("edge_pair")
        values["edge_gradient"] = None if pair is None else pair[0]
        values["edge_variance"] = None if pair is None else pair[1]
    else:
        attempt("enl", lambda: enl(test.array))
        values["line_contrast_error"] = None
        values["edge_gradient"] = None
        values["edge_variance"] = None

    attempt("q_pair", lambda: q_index(reference, test))
    pair = values.pop("q_pair")
    values["q_mean"] = None if pair is None else pair[0]
    values["q_std"] = None if pair is None else pair[1]
    attempt("beta_rho", lambda: laplacian_correlation(reference, test))
    attempt("err", lambda: error_metrics(reference, test))
    err = values.pop("err")
    for i, name in enumerate(("mae", "mse", "nmse", "dcon")):
        values[name] = None if err is None else err[i]
    return MetricReport(**values)
