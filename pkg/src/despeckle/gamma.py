"""Gamma speckle model: density, sampling, and maximum-likelihood fitting.

An L-look intensity pixel with mean backscatter lambda follows
Gamma(shape=L, rate=L/lambda), so the density is

    f(z) = L^L / (lambda^L Gamma(L)) * z^(L-1) * exp(-L z / lambda),  z > 0

with mean lambda and variance lambda^2 / L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, InvalidArgumentError

L_MAX = 1.0e4

# Bump this whenever the variate-generation algorithm below changes in any
# way that alters the stream of produced values for a given seed.
GAMMA_ALGORITHM_VERSION = 1


@dataclass(frozen=True)
class GammaParams:
    """Estimated pair (equivalent looks, mean backscatter)."""

    looks: float
    mean: float

    def __post_init__(self):
        if not (math.isfinite(self.looks) and 1.0 <= self.looks <= L_MAX):
            raise InvalidArgumentError(f"looks must be in [1, {L_MAX:g}], got {self.looks}")
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise InvalidArgumentError(f"mean must be finite and > 0, got {self.mean}")


@dataclass(frozen=True)
class FitResult:
    """MLE output plus data-quality flags.

    degenerate  -- the sample had (numerically) zero log-dispersion, so the
                   looks estimate was clamped to L_MAX.
    zero_shifted -- exact zeros were replaced by (smallest positive value)*1e-6
                   before fitting, to keep log z finite.
    """

    params: GammaParams
    degenerate: bool = False
    zero_shifted: bool = False


def density(p: GammaParams, z):
    """Gamma density at z (scalar or array); z must be strictly positive."""
    zarr = np.asarray(z, dtype=np.float64)
    if np.any(zarr <= 0) or not np.all(np.isfinite(zarr)):
        raise DomainError("density requires finite z > 0")
    L, lam = p.looks, p.mean
    log_f = (
        L * np.log(L)
        - L * np.log(lam)
        - special.gammaln(L)
        + (L - 1.0) * np.log(zarr)
        - L * zarr / lam
    )
    out = np.exp(log_f)
    return float(out) if np.isscalar(z) else out


def log_likelihood(p: GammaParams, values) -> float:
    return float(np.sum(np.log(density(p, np.asarray(values)))))


# ---------------------------------------------------------------------------
# sampling
#
# Gamma variates come from a fixed, self-contained rejection sampler so a
# given (seed, stream) reproduces the same values on any build, independent
# of the host library's distribution internals.  Only the uniform doubles of
# numpy's Generator are consumed.
#
# Algorithm (version 1), valid for shape >= 1:
#   Marsaglia & Tsang squeeze-free rejection with d = shape - 1/3,
#   c = 1/sqrt(9 d).  Standard normals are produced by Box-Muller:
#   x = sqrt(-2 ln u1) * cos(2 pi u2) with u1, u2 uniform on (0, 1].
#   Candidate v = (1 + c x)^3 is accepted when v > 0 and
#   ln u3 < x^2/2 + d - d v + d ln v.  Each round draws a (3, k) uniform
#   block (u1, u2, u3) for the k still-empty slots, which are filled in
#   index order; rejected slots go to the next round.


def _gamma_shape_ge1(shape: float, n: int, stream: np.random.Generator) -> np.ndarray:
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n, dtype=np.float64)
    pending = np.arange(n)
    while pending.size:
        u = stream.random((3, pending.size))
        u1 = 1.0 - u[0]  # in (0, 1], keeps the log finite
        x = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u[1])
        v = (1.0 + c * x) ** 3
        u3 = 1.0 - u[2]
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = (v > 0) & (np.log(u3) < 0.5 * x * x + d - d * v + d * np.log(v))
        out[pending[ok]] = d * v[ok]
        pending = pending[~ok]
    return out


def sample(p: GammaParams, n: int, stream: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws from Gamma(L, L/lambda): mean lambda, variance lambda^2/L."""
    if n < 1:
        raise InvalidArgumentError("sample size must be >= 1")
    return _gamma_shape_ge1(p.looks, n, stream) * (p.mean / p.looks)


def unit_speckle(looks: float, shape: tuple, stream: np.random.Generator) -> np.ndarray:
    """Unit-mean speckle field Gamma(L, L) of the given array shape."""
    n = int(np.prod(shape))
    return (_gamma_shape_ge1(looks, n, stream) / looks).reshape(shape)


# ---------------------------------------------------------------------------
# maximum likelihood


def _dispersion_gap(looks):
    """ln L - digamma(L): strictly decreasing on [1, L_MAX], -> 0 as L -> inf."""
    return np.log(looks) - special.digamma(looks)


def solve_looks(rhs) -> np.ndarray:
    """Solve ln L - digamma(L) = rhs for L, element-wise, on [1, L_MAX].

    Bisection with a 200-iteration cap: the objective is strictly
    decreasing, so the bracket always converges (final interval width
    ~1e4 * 2^-200, far below any tolerance of interest).  rhs above the
    L=1 value clamps to 1; rhs at or below the L_MAX value clamps to L_MAX.
    """
    rhs_arr = np.atleast_1d(np.asarray(rhs, dtype=np.float64))
    out = np.empty_like(rhs_arr)
    at_low = rhs_arr >= _dispersion_gap(1.0)
    at_high = rhs_arr <= _dispersion_gap(L_MAX)
    out[at_low] = 1.0
    out[at_high] = L_MAX
    todo = ~(at_low | at_high)
    lo = np.full(int(todo.sum()), 1.0)
    hi = np.full(lo.shape, L_MAX)
    target = rhs_arr[todo]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        # objective decreasing: value above target means the root is right of mid
        go_right = _dispersion_gap(mid) > target
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    out[todo] = 0.5 * (lo + hi)
    return out if np.ndim(rhs) else out[0]


def mle(values) -> FitResult:
    """Fit (L, lambda) by maximum likelihood.

    lambda-hat is the closed-form sample mean; L-hat solves
    ln L - digamma(L) = ln(mean) - mean(ln z).  Exact zeros are shifted to
    (smallest positive value) * 1e-6 with a flag; a constant sample clamps
    L-hat to L_MAX with the degeneracy flag.
    """
    z = np.asarray(values, dtype=np.float64).reshape(-1)
    if z.size < 2:
        raise DomainError("mle requires at least 2 values")
    if not np.all(np.isfinite(z)) or np.any(z < 0):
        raise DomainError("mle requires finite values >= 0")
    zero_shifted = False
    if np.any(z == 0):
        positive = z[z > 0]
        if positive.size == 0:
            raise DomainError("mle requires at least one positive value")
        z = np.where(z == 0, positive.min() * 1e-6, z)
        zero_shifted = True
    mean = float(z.mean())
    rhs = math.log(mean) - float(np.log(z).mean())
    if rhs <= 0.0:
        # zero log-dispersion (constant sample, up to rounding)
        return FitResult(GammaParams(L_MAX, mean), degenerate=True, zero_shifted=zero_shifted)
    looks = float(solve_looks(rhs))
    return FitResult(GammaParams(looks, mean), zero_shifted=zero_shifted)
