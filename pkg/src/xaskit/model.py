"""Shared domain types.

All types are immutable after construction (arrays are marked read-only), so
they can be shared freely between threads.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class AcquisitionMode(enum.Enum):
    TRANSMISSION = "transmission"
    FLUORESCENCE = "fluorescence"
    TOTAL_ELECTRON_YIELD = "tey"


class WindowKind(enum.Enum):
    HANNING = "hanning"
    KAISER = "kaiser"


@dataclass(frozen=True)
class Metadata:
    element: str = ""
    edge: str = ""
    sample_name: str = ""
    beamline: str = ""
    facility: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for key in self.extra:
            if not key:
                raise ValueError("metadata keys must be non-empty")

    def with_extra(self, key, value):
        new = dict(self.extra)
        new[key] = value
        return replace(self, extra=new)


@dataclass(frozen=True)
class EnergyGrid:
    energies: np.ndarray

    def __post_init__(self):
        e = _frozen(self.energies)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("energy grid needs at least 2 points")
        if not np.all(np.isfinite(e)):
            raise ValueError("energy grid contains non-finite values")
        if np.any(np.diff(e) <= 0):
            raise ValueError("energy grid must be strictly increasing")
        object.__setattr__(self, "energies", e)

    def __len__(self):
        return self.energies.size


@dataclass(frozen=True)
class Spectrum:
    grid: EnergyGrid
    mu: np.ndarray
    mode: AcquisitionMode = AcquisitionMode.TRANSMISSION
    meta: Metadata = field(default_factory=Metadata)

    def __post_init__(self):
        mu = _frozen(self.mu)
        if mu.shape != self.grid.energies.shape:
            raise ValueError("mu and energy grid lengths differ")
        if not np.all(np.isfinite(mu)):
            raise ValueError("mu contains non-finite values")
        object.__setattr__(self, "mu", mu)

    @property
    def energies(self):
        return self.grid.energies


@dataclass(frozen=True)
class NormalizedSpectrum:
    grid: EnergyGrid
    mu_corrected: np.ndarray
    e0: float
    edge_step: float

    def __post_init__(self):
        mc = _frozen(self.mu_corrected)
        if mc.shape != self.grid.energies.shape:
            raise ValueError("mu_corrected and energy grid lengths differ")
        if self.edge_step <= 0:
            raise ValueError("edge step must be positive")
        object.__setattr__(self, "mu_corrected", mc)


@dataclass(frozen=True)
class ChiSpectrum:
    k: np.ndarray
    chi: np.ndarray
    weight: int = 0

    def __post_init__(self):
        k = _frozen(self.k)
        chi = _frozen(self.chi)
        if k.shape != chi.shape:
            raise ValueError("k and chi lengths differ")
        if k.size and k[0] < 0:
            raise ValueError("k must be nonnegative")
        if k.size > 1 and np.any(np.diff(k) <= 0):
            raise ValueError("k must be strictly increasing")
        if self.weight not in (0, 1, 2, 3):
            raise ValueError("k-weight must be in {0,1,2,3}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "chi", chi)


@dataclass(frozen=True)
class WindowSpec:
    kind: WindowKind = WindowKind.HANNING
    k_min: float = 2.0
    k_max: float = 12.0
    dk: float = 1.0
    alpha: float = 0.0  # Kaiser only

    def __post_init__(self):
        if self.dk < 0:
            raise ValueError("taper width dk must be >= 0")
        if self.alpha < 0:
            raise ValueError("Kaiser alpha must be >= 0")
        if self.k_min + self.dk > self.k_max - self.dk:
            raise ValueError("window flat region is empty (k_min + dk > k_max - dk)")


@dataclass(frozen=True)
class FtParams:
    r_max: float = 8.0
    r_bkg: float = 1.0
    oversample: int = 8
    window: WindowSpec = field(default_factory=WindowSpec)

    def __post_init__(self):
        if not self.r_max > self.r_bkg >= 0:
            raise ValueError("need r_max > r_bkg >= 0")
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")


@dataclass(frozen=True)
class RSpectrum:
    r: np.ndarray
    values: np.ndarray
    params: FtParams

    def __post_init__(self):
        r = _frozen(self.r)
        values = _frozen(self.values, dtype=complex)
        if r.shape != values.shape:
            raise ValueError("r and values lengths differ")
        if r.size >= 2:
            dr = np.diff(r)
            if np.any(np.abs(dr - dr[0]) > 1e-12 * max(abs(dr[0]), 1.0)):
                raise ValueError("R grid must be uniform")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", values)

    @property
    def magnitude(self):
        return np.abs(self.values)
