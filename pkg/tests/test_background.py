import numpy as np
import pytest

from xaskit import EnergyGrid, FitError, Spectrum
from xaskit.background import (BqsConfig, bqs, edge_step, fit_poly_background,
                               fit_preedge, fit_spline_background, knot_count,
                               normalize_flatten, refine_knots)

from conftest import synthetic_exafs


def test_preedge_recovers_exact_line():
    e = np.linspace(8800.0, 9400.0, 400)
    mu = 0.2 - 3e-4 * (e - 9000.0)
    s = Spectrum(grid=EnergyGrid(e), mu=mu)
    pre = fit_preedge(s, 9000.0)
    assert pre.evaluate(9000.0) == pytest.approx(0.2, abs=1e-10)
    assert np.allclose(pre.evaluate(e), mu, atol=1e-9)


def test_preedge_range_clipped_and_validated():
    e = np.linspace(8990.0, 9400.0, 100)
    s = Spectrum(grid=EnergyGrid(e), mu=np.ones_like(e))
    with pytest.raises(FitError):
        # only a handful of samples below the edge at 8992
        fit_preedge(s, 8992.0)


def test_knot_count_formula():
    # 0.326 * 1.0 * sqrt(400) = 6.52 -> rounds to 7
    assert knot_count(9000.0, 9000.0, 9400.0, 1.0) == 7
    # doubling r_bkg doubles the raw count
    assert knot_count(9000.0, 9000.0, 9400.0, 2.0) == 13
    # tiny spans clamp to the cubic-spline minimum
    assert knot_count(9000.0, 9000.0, 9060.0, 0.5) == 4


def test_spline_background_tracks_smooth_mu():
    e = np.linspace(9000.0, 9500.0, 500)
    mu = 1.0 - 2e-4 * (e - 9000.0)
    s = Spectrum(grid=EnergyGrid(e), mu=mu)
    spline = fit_spline_background(s, 9000.0)
    resid = spline.evaluate(e) - mu
    assert float(np.sqrt(np.mean(resid ** 2))) < 5e-3


def test_spline_knot_y_override_and_shape_check():
    e = np.linspace(9000.0, 9500.0, 300)
    s = Spectrum(grid=EnergyGrid(e), mu=np.ones_like(e))
    base = fit_spline_background(s, 9000.0)
    override = np.linspace(0.9, 1.1, base.knots_y.size)
    spline = fit_spline_background(s, 9000.0, knot_y=override)
    assert np.allclose(spline.knots_y, override)
    with pytest.raises(FitError):
        fit_spline_background(s, 9000.0, knot_y=np.ones(base.knots_y.size + 1))


def test_bqs_closed_forms():
    k = np.linspace(1.0, 10.0, 200)
    score, comps = bqs(np.zeros_like(k), k)
    assert score == 0.0
    c = 0.7
    score, comps = bqs(np.full_like(k, c), k)
    # mean c, slope 0, variance 0, symmetry 1
    assert score == pytest.approx(c + 1.0, rel=1e-12)
    # the residual slope of an alternating signal scales with the grid
    # spacing, so the closed form needs a dense grid
    kd = np.linspace(1.0, 10.0, 2_000_000)
    alt = c * np.where(np.arange(kd.size) % 2 == 0, 1.0, -1.0)
    score, comps = bqs(alt, kd)
    assert score == pytest.approx(c, rel=1e-6)
    assert comps["symmetry"] == pytest.approx(0.0, abs=1e-12)


def test_bqs_weights_and_p():
    k = np.linspace(0.0, 10.0, 101)
    sig = 0.1 * k  # pure slope
    cfg = BqsConfig(weights=(0.0, 1.0, 0.0, 0.0), p=2.0)
    score, comps = bqs(sig, k, cfg)
    # slope component: sum(dk*sig')/sum(dk^2) recovers the linear coefficient
    assert comps["slope"] == pytest.approx(0.1, rel=1e-9)
    assert score == pytest.approx(0.1, rel=1e-9)
    cfg1 = BqsConfig(weights=(0.0, 1.0, 0.0, 0.0), p=1.0)
    score1, _ = bqs(sig, k, cfg1)
    assert score1 > 0


def test_refine_never_worsens_score():
    spectrum, truth = synthetic_exafs()
    e0 = truth["e0"]
    spline = fit_spline_background(spectrum, e0)
    cfg = BqsConfig()
    def score_of(sp):
        e = spectrum.energies
        post = e >= e0
        from xaskit.core import e_to_k
        k = e_to_k(e[post], e0)
        chi_k3 = (spectrum.mu[post] - sp.evaluate(e[post])) / truth["edge_step"] * k ** 3
        return bqs(chi_k3, k, cfg)[0]
    before = score_of(spline)
    refined = refine_knots(spectrum, e0, spline, cfg, edge_step=truth["edge_step"])
    assert score_of(refined) <= before + 1e-12


def test_poly_degree_selection():
    spectrum, truth = synthetic_exafs()  # long, dense scan -> cubic
    post = fit_poly_background(spectrum, truth["e0"])
    assert post.degree == 3
    # short scan falls back to the quadratic
    e = np.linspace(9000.0, 9200.0, 80)
    s = Spectrum(grid=EnergyGrid(e), mu=1.0 + 1e-4 * (e - 9000.0))
    assert fit_poly_background(s, 9000.0).degree == 2


def test_poly_recovers_cubic_background():
    spectrum, truth = synthetic_exafs()
    post = fit_poly_background(spectrum, truth["e0"])
    e_post = spectrum.energies[spectrum.energies >= truth["e0"] + 50.0]
    x = e_post - truth["e0"]
    mu0 = 1.1 - 3e-4 * x + 2e-7 * x ** 2 - 5e-11 * x ** 3
    resid = post.evaluate(e_post) - mu0
    assert float(np.sqrt(np.mean(resid ** 2))) < 2e-3


def test_poly_coeffs_in_e_equivalent():
    spectrum, truth = synthetic_exafs()
    post = fit_poly_background(spectrum, truth["e0"])
    e = np.linspace(9100.0, 9500.0, 7)
    direct = post.evaluate(e)
    rebased = np.polynomial.polynomial.polyval(e, np.asarray(post.coeffs_in_e()))
    assert np.allclose(direct, rebased, rtol=1e-8)


def test_edge_step_positive_and_inverted():
    class Flat:
        def __init__(self, v):
            self.v = v
        def evaluate(self, e):
            return np.full_like(np.asarray(e, dtype=float), self.v) \
                if np.ndim(e) else self.v
    assert edge_step(Flat(0.1), Flat(1.1), 9000.0) == pytest.approx(1.0)
    with pytest.raises(FitError, match="inverted"):
        edge_step(Flat(1.1), Flat(0.1), 9000.0)


def test_normalize_flatten_branches_and_continuity():
    spectrum, truth = synthetic_exafs()
    e0 = truth["e0"]
    pre = fit_preedge(spectrum, e0)
    post = fit_poly_background(spectrum, e0)
    step = edge_step(pre, post, e0)
    norm = normalize_flatten(spectrum, pre, post, step, e0)
    e = spectrum.energies
    assert abs(np.mean(norm.mu_corrected[e <= e0 - 30.0])) < 0.02
    assert np.mean(norm.mu_corrected[e >= e0 + 50.0]) == pytest.approx(1.0, abs=0.02)
    # branch values agree at e0 exactly: (mu-pre)/step == (mu-post+step)/step
    mu_at = np.interp(e0, e, spectrum.mu)
    lo = (mu_at - pre.evaluate(e0)) / step
    hi = (mu_at - post.evaluate(e0) + step) / step
    assert lo == pytest.approx(hi, rel=1e-12)
