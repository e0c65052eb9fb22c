"""Physical constants and the small numeric primitives shared by every stage.

Units are fixed package-wide: energies in eV, photoelectron wavevectors in
1/Angstrom, distances in Angstrom.  Conversions happen here and nowhere else.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError, RangeError

# 2*m_e/hbar^2 in 1/(eV Angstrom^2), CODATA-derived
K_CONV = 0.2624682917

# (2/pi)*sqrt(K_CONV), rounded as used by the knot-count rule
KNOT_CONST = 0.326


def e_to_k(e, e0):
    """Convert photon energy (eV) above the edge e0 to wavevector k (1/Angstrom).

    k = sqrt(K_CONV * (e - e0)).  Raises DomainError for e < e0; callers are
    expected to clip to the post-edge range first.
    """
    e = np.asarray(e, dtype=float)
    rel = e - e0
    if np.any(rel < 0):
        raise DomainError("e_to_k requires e >= e0; clip to the post-edge range first")
    k = np.sqrt(K_CONV * rel)
    return float(k) if k.ndim == 0 else k


def k_to_e(k, e0):
    """Inverse of e_to_k: e = e0 + k**2 / K_CONV."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise DomainError("k must be nonnegative")
    e = e0 + k * k / K_CONV
    return float(e) if e.ndim == 0 else e


def interpolate_linear(xs, ys, x_new, extrapolate=False):
    """Piecewise-linear interpolation, exact on the knots.

    xs must be strictly increasing.  Points of x_new outside [xs[0], xs[-1]]
    raise RangeError unless extrapolate=True, in which case the end segments
    are extended linearly.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or xs.size != ys.size:
        raise ValueError("xs and ys must be 1-d arrays of equal length >= 2")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly increasing")
    scalar = np.ndim(x_new) == 0
    x_new = np.atleast_1d(np.asarray(x_new, dtype=float))

    below = x_new < xs[0]
    above = x_new > xs[-1]
    if not extrapolate and (below.any() or above.any()):
        raise RangeError(
            f"interpolation target outside [{xs[0]}, {xs[-1]}] "
            "(pass extrapolate=True to extend end segments)"
        )
    out = np.interp(x_new, xs, ys)
    if extrapolate:
        if below.any():
            slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            out[below] = ys[0] + slope * (x_new[below] - xs[0])
        if above.any():
            slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out[above] = ys[-1] + slope * (x_new[above] - xs[-1])
    return float(out[0]) if scalar else out
