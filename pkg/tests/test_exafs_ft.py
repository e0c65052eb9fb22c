import numpy as np
import pytest

from xaskit import DomainError, XasKitError
from xaskit.ftransform import (bessel_i0, extract_chi, forward_ft, inverse_ft,
                               k_weight, rbkg_filter, window_values, windowed)
from xaskit.model import ChiSpectrum, FtParams, WindowKind, WindowSpec

from conftest import synthetic_exafs


def sine_chi(r0, k_lo=0.0, k_hi=14.0, n=2801):
    k = np.linspace(k_lo, k_hi, n)
    return ChiSpectrum(k=k, chi=np.sin(2.0 * k * r0), weight=0)


def hanning_params(r_max=8.0, r_bkg=1.0, k_min=2.0, k_max=12.0, dk=1.0,
                   oversample=8):
    window = WindowSpec(kind=WindowKind.HANNING, k_min=k_min, k_max=k_max, dk=dk)
    return FtParams(r_max=r_max, r_bkg=r_bkg, oversample=oversample, window=window)


# -- chi extraction and weighting -------------------------------------------

def test_extract_chi_matches_truth():
    spectrum, truth = synthetic_exafs()
    from xaskit.background import fit_poly_background
    post = fit_poly_background(spectrum, truth["e0"])
    chi = extract_chi(spectrum, post, truth["edge_step"], truth["e0"])
    assert chi.weight == 0
    # post-edge sampling of the synthetic starts at k = 1
    assert chi.k[0] == pytest.approx(1.0, abs=1e-9)
    truth_chi = truth["osc"] / truth["edge_step"]
    sel = chi.k >= 1.0
    r = np.corrcoef(chi.chi[sel], truth_chi[sel])[0, 1]
    assert r > 0.99


def test_k_weight_rules():
    k = np.linspace(0.0, 10.0, 50)
    chi = ChiSpectrum(k=k, chi=np.ones_like(k), weight=0)
    w2 = k_weight(chi, 2)
    assert w2.weight == 2
    assert np.allclose(w2.chi, k ** 2)
    assert k_weight(chi, 0) is chi
    with pytest.raises(XasKitError, match="already"):
        k_weight(w2, 1)
    with pytest.raises(ValueError):
        k_weight(chi, 4)


# -- Bessel and windows ------------------------------------------------------

def test_bessel_i0_reference_values():
    # 30-term series evaluated independently
    import math
    def oracle(x):
        return sum((0.25 * x * x) ** m / math.factorial(m) ** 2 for m in range(30))
    for x in (0.5, 1.0, 2.0, 5.0, 10.0):
        assert bessel_i0(x) == pytest.approx(oracle(x), rel=1e-12)
    assert bessel_i0(0.0) == 1.0
    with pytest.raises(DomainError):
        bessel_i0(-1.0)


@pytest.mark.parametrize("kind,alpha", [(WindowKind.HANNING, 0.0),
                                        (WindowKind.KAISER, 5.0)])
def test_window_shape_properties(kind, alpha):
    spec = WindowSpec(kind=kind, k_min=2.0, k_max=12.0, dk=1.0, alpha=alpha)
    k = np.linspace(0.0, 14.0, 1401)
    w = window_values(k, spec)
    assert np.all(w >= 0.0) and np.all(w <= 1.0 + 1e-12)
    assert np.all(w[(k < 2.0) | (k > 12.0)] == 0.0)
    assert np.allclose(w[(k >= 3.0) & (k <= 11.0)], 1.0)
    # taper is monotonic and continuous at both joins
    rising = w[(k >= 2.0) & (k <= 3.0)]
    assert np.all(np.diff(rising) >= -1e-12)
    assert w[np.argmin(np.abs(k - 3.0))] == pytest.approx(1.0, abs=1e-6)
    # Hanning tapers to zero; Kaiser keeps its 1/I0(alpha) pedestal
    edge_value = 0.0 if kind is WindowKind.HANNING else 1.0 / bessel_i0(alpha)
    assert w[np.argmin(np.abs(k - 2.0))] == pytest.approx(edge_value, abs=1e-6)


def test_window_symmetry():
    spec = WindowSpec(kind=WindowKind.KAISER, k_min=2.0, k_max=12.0, dk=1.5,
                      alpha=4.0)
    k = np.linspace(2.0, 12.0, 501)
    w = window_values(k, spec)
    assert np.allclose(w, w[::-1], atol=1e-12)


def test_zero_dk_is_boxcar():
    spec = WindowSpec(kind=WindowKind.HANNING, k_min=3.0, k_max=10.0, dk=0.0)
    k = np.linspace(0.0, 14.0, 141)
    w = window_values(k, spec)
    inside = (k >= 3.0) & (k <= 10.0)
    assert np.all(w[inside] == 1.0)
    assert np.all(w[~inside] == 0.0)


# -- forward/inverse transforms ----------------------------------------------

@pytest.mark.parametrize("r0", [1.5, 2.5, 4.0])
def test_forward_peak_position(r0):
    chi = sine_chi(r0)
    params = hanning_params()
    rspec = forward_ft(chi, params)
    dr = rspec.r[1] - rspec.r[0]
    peak = rspec.r[np.argmax(np.abs(rspec.values))]
    assert abs(peak - r0) <= dr + 1e-12


def test_forward_rejects_window_outside_data():
    chi = sine_chi(2.5, k_lo=3.0, k_hi=10.0)
    with pytest.raises(DomainError, match="beyond the data range"):
        forward_ft(chi, hanning_params())


def test_round_trip_recovers_windowed_chi():
    chi = sine_chi(2.5, n=5601)
    params = hanning_params(r_max=12.0, oversample=8)
    rspec = forward_ft(chi, params)
    dr = rspec.r[1] - rspec.r[0]
    sel = (chi.k >= 2.0) & (chi.k <= 12.0)
    recovered = inverse_ft(rspec, chi.k[sel], dr=dr)
    target = windowed(chi, params).chi[sel]
    rms = np.sqrt(np.mean((recovered - target) ** 2))
    assert rms < 1e-3 * np.max(np.abs(chi.chi))


def test_oversample_convergence():
    chi = sine_chi(2.5)
    r8 = forward_ft(chi, hanning_params(oversample=8))
    r16 = forward_ft(chi, hanning_params(oversample=16))
    # the oversample-16 R grid contains the oversample-8 grid at even indices
    assert np.allclose(r16.r[::2][:r8.r.size], r8.r, atol=1e-12)
    m8 = np.abs(r8.values)
    m16 = np.abs(r16.values[::2][:r8.r.size])
    assert np.max(np.abs(m8 - m16)) < 1e-3 * np.max(m8)


def test_rbkg_filter_attenuates_low_r():
    k = np.linspace(0.0, 14.0, 2801)
    low = np.sin(2.0 * k * 0.4)
    high = np.sin(2.0 * k * 4.0)
    params = hanning_params()
    flat = (k >= 3.0) & (k <= 11.0)

    chi_low = ChiSpectrum(k=k, chi=low, weight=0)
    filt_low, _ = rbkg_filter(chi_low, params)
    before = np.sqrt(np.mean((low * window_values(k, params.window))[flat] ** 2))
    after = np.sqrt(np.mean(filt_low.chi[flat] ** 2))
    assert after < 0.1 * before

    chi_high = ChiSpectrum(k=k, chi=high, weight=0)
    filt_high, _ = rbkg_filter(chi_high, params)
    err = np.sqrt(np.mean((filt_high.chi[flat] - high[flat]) ** 2))
    ref = np.sqrt(np.mean(high[flat] ** 2))
    assert err < 0.02 * ref


def test_rbkg_zero_is_identity():
    chi = sine_chi(2.5)
    params = hanning_params(r_bkg=0.0)
    filt, r_filt = rbkg_filter(chi, params)
    assert np.allclose(filt.chi, chi.chi)
    base = forward_ft(chi, params)
    assert np.allclose(np.abs(r_filt.values), np.abs(base.values))
