"""Hot numeric kernels for the Riemann-sum Fourier transforms.

Two interchangeable backends: numba @njit loops (default) and a pure-numpy
path.  Set XASKIT_NO_NUMBA=1 to force the numpy path; it is also used
automatically when numba is unavailable.  Both backends use pairwise
summation, so results are deterministic for a fixed input.
"""
from __future__ import annotations

import os

import numpy as np

_SQRT_2_PI = np.sqrt(2.0 / np.pi)

_disabled = os.environ.get("XASKIT_NO_NUMBA", "") not in ("", "0")


def _ft_forward_numpy(chi_w, k, r, dk):
    phase = np.exp(-2j * np.outer(r, k))
    return _SQRT_2_PI * dk * np.sum(phase * chi_w, axis=1)


def _ft_inverse_numpy(values, r, k, dr):
    phase = np.exp(2j * np.outer(k, r))
    return _SQRT_2_PI * dr * np.real(np.sum(phase * values, axis=1))


if not _disabled:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        _disabled = True

if not _disabled:

    @njit(cache=True)
    def _pairwise_complex(buf, n):
        # in-place adjacent-pair tree reduction (consumes buf)
        m = n
        while m > 1:
            half = m // 2
            for i in range(half):
                buf[i] = buf[2 * i] + buf[2 * i + 1]
            if m % 2:
                buf[half] = buf[m - 1]
                m = half + 1
            else:
                m = half
        return buf[0]

    @njit(cache=True)
    def _ft_forward_numba(chi_w, k, r, dk):
        out = np.empty(r.size, np.complex128)
        buf = np.empty(k.size, np.complex128)
        for j in range(r.size):
            for i in range(k.size):
                ph = -2.0 * k[i] * r[j]
                buf[i] = chi_w[i] * complex(np.cos(ph), np.sin(ph))
            out[j] = _SQRT_2_PI * dk * _pairwise_complex(buf, k.size)
        return out

    @njit(cache=True)
    def _ft_inverse_numba(values, r, k, dr):
        out = np.empty(k.size, np.float64)
        buf = np.empty(r.size, np.complex128)
        for j in range(k.size):
            for i in range(r.size):
                ph = 2.0 * k[j] * r[i]
                buf[i] = values[i] * complex(np.cos(ph), np.sin(ph))
            out[j] = _SQRT_2_PI * dr * _pairwise_complex(buf, r.size).real
        return out

    ft_forward = _ft_forward_numba
    ft_inverse = _ft_inverse_numba
    BACKEND = "numba"
else:
    ft_forward = _ft_forward_numpy
    ft_inverse = _ft_inverse_numpy
    BACKEND = "numpy"
