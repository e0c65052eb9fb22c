"""Savitzky-Golay smoothing/derivatives and absorption-edge (E0) location."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .core import interpolate_linear
from .errors import FitError, XasKitError


@dataclass(frozen=True)
class SavGolParams:
    window: int = 7
    polyorder: int = 2
    deriv: int = 0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be an odd integer >= 3")
        if not 1 <= self.polyorder < self.window:
            raise ValueError("need 1 <= polyorder < window")
        if not 0 <= self.deriv <= self.polyorder:
            raise ValueError("need 0 <= deriv <= polyorder")


class E0Method(enum.Enum):
    FIRST_DERIVATIVE = "first_derivative"
    SMOOTHED_FIRST_DERIVATIVE = "smoothed_first_derivative"
    HALF_HEIGHT = "half_height"
    SMOOTHED_SECOND_DERIVATIVE = "smoothed_second_derivative"


DEFAULT_E0_METHOD = E0Method.SMOOTHED_FIRST_DERIVATIVE


def savgol(ys, params, spacing=1.0):
    """Savitzky-Golay filter; exact for polynomials of degree <= polyorder.

    Edges are handled by fitting the local polynomial to the first/last
    window and evaluating it there (no padding artifacts).  For deriv=d the
    output is the d-th derivative estimate on a grid with the given spacing.
    """
    ys = np.asarray(ys, dtype=float)
    if ys.size < params.window:
        raise XasKitError(
            f"need at least window={params.window} samples, got {ys.size}")
    return savgol_filter(ys, params.window, params.polyorder,
                         deriv=params.deriv, delta=spacing, mode="interp")


def _resample_uniform(energies, values):
    spacing = float(np.median(np.diff(energies)))
    n = int(np.floor((energies[-1] - energies[0]) / spacing)) + 1
    grid = energies[0] + spacing * np.arange(n)
    grid = np.clip(grid, energies[0], energies[-1])
    return grid, interpolate_linear(energies, values, grid), spacing


def derivative(spectrum, order=1, smoothed=False, params=None):
    """d^n mu / dE^n on the spectrum's own grid, n in {1, 2}.

    Unsmoothed: non-uniform central finite differences.  Smoothed: resample
    to the median spacing, apply Savitzky-Golay with deriv=order, interpolate
    back.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    e = spectrum.energies
    mu = spectrum.mu
    if e.size < 5:
        raise XasKitError("need at least 5 points for a derivative")
    if not smoothed:
        d = np.gradient(mu, e, edge_order=2)
        if order == 2:
            d = np.gradient(d, e, edge_order=2)
        return d
    params = params or SavGolParams(deriv=order)
    if params.deriv != order:
        params = SavGolParams(params.window, params.polyorder, deriv=order)
    grid, vals, spacing = _resample_uniform(e, mu)
    d = savgol(vals, params, spacing=spacing)
    # the uniform grid can stop short of e[-1] by under one spacing
    return interpolate_linear(grid, d, e, extrapolate=True)


def _interp_zero_crossings(x, y):
    sign = np.sign(y)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    crossings = [x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]) for i in idx]
    crossings.extend(x[np.nonzero(y == 0)[0]])
    return np.sort(np.array(crossings))


def find_e0(spectrum, method=DEFAULT_E0_METHOD, params=None):
    """Locate the absorption edge energy by the requested method.

    All methods operate on the shape of mu(E) only, so the result is
    invariant under mu -> a*mu + b for a > 0.
    """
    e = spectrum.energies
    mu = spectrum.mu
    span = float(mu.max() - mu.min())
    if span <= 0:
        raise FitError("no edge found: flat spectrum")

    if method is E0Method.HALF_HEIGHT:
        level = mu.min() + 0.5 * span
        above = np.nonzero(mu >= level)[0]
        if above.size == 0:
            raise FitError("no edge found: half height never reached")
        i = above[0]
        if i == 0 or mu[i] == mu[i - 1]:
            return float(e[i])
        frac = (level - mu[i - 1]) / (mu[i] - mu[i - 1])
        return float(e[i - 1] + frac * (e[i] - e[i - 1]))

    smoothed = method in (E0Method.SMOOTHED_FIRST_DERIVATIVE,
                          E0Method.SMOOTHED_SECOND_DERIVATIVE)
    d1 = derivative(spectrum, order=1, smoothed=smoothed, params=params)
    if not np.any(d1 > 0) and method is not E0Method.SMOOTHED_SECOND_DERIVATIVE:
        raise FitError("no edge found: derivative never positive")
    # ties broken toward lowest energy: argmax takes the first maximum
    peak = int(np.argmax(d1))
    if method in (E0Method.FIRST_DERIVATIVE, E0Method.SMOOTHED_FIRST_DERIVATIVE):
        return float(e[peak])

    d2 = derivative(spectrum, order=2, smoothed=True, params=params)
    crossings = _interp_zero_crossings(e, d2)
    if crossings.size == 0:
        raise FitError("no edge found: second derivative has no zero crossing")
    return float(crossings[np.argmin(np.abs(crossings - e[peak]))])
