"""chi(k) extraction, k-weighting, window tapers and the Riemann-sum
forward/inverse Fourier transforms with Rbkg filtering.

Sign convention: the forward transform uses exp(-2ikR), the inverse
exp(+2ikR), both normalized by sqrt(2/pi).  No phase correction is applied
anywhere, so R-space peaks sit at the uncorrected (apparent) distances.
"""
from __future__ import annotations

import numpy as np

from ._kernels import ft_forward, ft_inverse
from .core import e_to_k
from .errors import DomainError, XasKitError
from .model import ChiSpectrum, RSpectrum, WindowKind


def extract_chi(spectrum, post, edge_step, e0):
    """chi(k) = (mu - S_post)/edge_step over the post-edge range.

    The k=0 point is included exactly when E0 itself is a grid sample.
    """
    if edge_step <= 0:
        raise XasKitError("edge step must be positive")
    e = spectrum.energies
    mask = e >= e0
    if np.count_nonzero(mask) < 2:
        raise XasKitError("no post-edge range to extract chi from")
    e_post = e[mask]
    chi = (spectrum.mu[mask] - post.evaluate(e_post)) / edge_step
    k = e_to_k(e_post, e0)
    return ChiSpectrum(k=k, chi=chi, weight=0)


def k_weight(chi, n):
    """Multiply chi by k^n.  Weighting an already-weighted spectrum is an
    error (no silent compounding)."""
    if n not in (0, 1, 2, 3):
        raise ValueError("k-weight must be in {0,1,2,3}")
    if chi.weight != 0:
        raise XasKitError(f"spectrum already carries k^{chi.weight} weighting")
    if n == 0:
        return chi
    return ChiSpectrum(k=chi.k, chi=chi.chi * chi.k ** n, weight=n)


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero, by its power
    series; terms are added until they fall below 1e-16 of the partial sum."""
    x = float(x)
    if not np.isfinite(x) or x < 0:
        raise DomainError("bessel_i0 requires finite x >= 0")
    total = 1.0
    term = 1.0
    m = 0
    q = 0.25 * x * x
    while True:
        m += 1
        term *= q / (m * m)
        total += term
        if term < 1e-16 * total:
            return total


def _taper(n, kind, alpha):
    # n in [0, 1]: 0 at the window edge, 1 at the flat region
    if kind is WindowKind.HANNING:
        return 0.5 * (1.0 - np.cos(np.pi * n))
    # Kaiser: rising half of I0(alpha*sqrt(1-(2x-1)^2))/I0(alpha) with x = n/2
    i0a = bessel_i0(alpha)
    arg = alpha * np.sqrt(np.clip(1.0 - (n - 1.0) ** 2, 0.0, 1.0))
    return np.array([bessel_i0(a) for a in np.atleast_1d(arg)]) / i0a


def window_values(k, spec):
    """Evaluate the window W(k): zero outside [k_min, k_max], unity on the
    flat interior, tapered over dk-wide edges."""
    k = np.asarray(k, dtype=float)
    w = np.zeros_like(k)
    flat = (k >= spec.k_min + spec.dk) & (k <= spec.k_max - spec.dk)
    w[flat] = 1.0
    if spec.dk > 0:
        lo = (k >= spec.k_min) & (k < spec.k_min + spec.dk)
        hi = (k > spec.k_max - spec.dk) & (k <= spec.k_max)
        w[lo] = _taper((k[lo] - spec.k_min) / spec.dk, spec.kind, spec.alpha)
        w[hi] = _taper((spec.k_max - k[hi]) / spec.dk, spec.kind, spec.alpha)
    else:
        inside = (k >= spec.k_min) & (k <= spec.k_max)
        w[inside] = 1.0
    return w


def _uniform_k_grid(params):
    w = params.window
    dk = np.pi / (2.0 * params.r_max * params.oversample)
    count = int(np.floor((w.k_max - w.k_min) / dk)) + 1
    return w.k_min + dk * np.arange(count), dk


def _r_grid(params):
    w = params.window
    dr = np.pi / (2.0 * (w.k_max - w.k_min) * params.oversample)
    count = int(np.floor(params.r_max / dr)) + 1
    return dr * np.arange(count), dr


def forward_ft(chi, params):
    """Forward Riemann-sum transform of a windowed chi(k) to R-space.

    chi is linearly interpolated onto the uniform k-grid (zero outside its
    own range); the window must lie within the data range.
    """
    w = params.window
    tol = 1e-9
    if chi.k[0] > w.k_min + tol or chi.k[-1] < w.k_max - tol:
        raise DomainError(
            f"window [{w.k_min}, {w.k_max}] extends beyond the data range "
            f"[{chi.k[0]:.4g}, {chi.k[-1]:.4g}]")
    kg, dk = _uniform_k_grid(params)
    chi_u = np.interp(kg, chi.k, chi.chi, left=0.0, right=0.0)
    chi_w = chi_u * window_values(kg, w)
    r, _ = _r_grid(params)
    values = ft_forward(np.ascontiguousarray(chi_w), np.ascontiguousarray(kg),
                        np.ascontiguousarray(r), dk)
    return RSpectrum(r=r, values=values, params=params)


def inverse_ft(rspec, k, dr=None):
    """Real part of the inverse Riemann-sum transform, evaluated on k."""
    k = np.asarray(k, dtype=float)
    if rspec.r.size == 0:
        return np.zeros_like(k)
    if dr is None:
        dr = float(rspec.r[1] - rspec.r[0]) if rspec.r.size > 1 else 0.0
    return ft_inverse(np.ascontiguousarray(rspec.values, dtype=np.complex128),
                      np.ascontiguousarray(rspec.r), np.ascontiguousarray(k), dr)


def windowed(chi, params):
    """chi multiplied by the window, on its own k samples."""
    return ChiSpectrum(k=chi.k, chi=chi.chi * window_values(chi.k, params.window),
                       weight=chi.weight)


def rbkg_filter(chi, params):
    """Remove residual low-R background below r_bkg.

    chi -> chi(R); the portion with R < r_bkg is inverse-transformed to give
    chi_bkg(k), which is subtracted from chi; a second forward transform
    yields the filtered R-space spectrum.  Returns (chi_filtered, r_filtered).
    """
    rspec = forward_ft(chi, params)
    _, dr = _r_grid(params)
    mask = rspec.r < params.r_bkg
    if np.any(mask):
        low = RSpectrum(r=rspec.r[mask], values=rspec.values[mask],
                        params=params)
        chi_bkg = inverse_ft(low, chi.k, dr=dr)
    else:
        chi_bkg = np.zeros_like(chi.chi)
    chi_filtered = ChiSpectrum(k=chi.k, chi=chi.chi - chi_bkg, weight=chi.weight)
    r_filtered = forward_ft(chi_filtered, params)
    return chi_filtered, r_filtered
