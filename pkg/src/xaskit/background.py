"""Pre/post-edge background models, BQS scoring, knot refinement,
edge-step determination and normalization/flattening.

Two post-edge engines are provided: a natural cubic spline anchored on
equally spaced k-space knots (refined against the background quality
score), and a fast weighted polynomial with adaptive degree selection.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .core import K_CONV, KNOT_CONST, e_to_k, interpolate_linear
from .errors import FitError
from .model import EnergyGrid, NormalizedSpectrum
from .optimize import nelder_mead

DEFAULT_PRE_RANGE = (-150.0, -30.0)   # eV relative to e0
DEFAULT_POST_MIN_OFFSET = 50.0        # eV above e0 (polynomial engine)


# ---------------------------------------------------------------------------
# pre-edge
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PreEdgeModel:
    coeffs: tuple          # polynomial coefficients in E, ascending degree
    fit_range: tuple

    def evaluate(self, e):
        return np.polynomial.polynomial.polyval(np.asarray(e, dtype=float),
                                                np.asarray(self.coeffs))


def fit_preedge(spectrum, e0, fit_range=None, degree=1):
    """Ordinary least squares line/parabola over the pre-edge window."""
    if degree not in (1, 2):
        raise ValueError("pre-edge degree must be 1 or 2")
    e = spectrum.energies
    if fit_range is None:
        fit_range = (e0 + DEFAULT_PRE_RANGE[0], e0 + DEFAULT_PRE_RANGE[1])
    lo = max(fit_range[0], e[0])
    hi = min(fit_range[1], e0)
    mask = (e >= lo) & (e <= hi)
    if np.count_nonzero(mask) < 3:
        raise FitError("pre-edge fit needs at least 3 points below the edge")
    poly = np.polynomial.Polynomial.fit(e[mask], spectrum.mu[mask], degree)
    return PreEdgeModel(coeffs=tuple(poly.convert().coef), fit_range=(lo, hi))


# ---------------------------------------------------------------------------
# spline engine
# ---------------------------------------------------------------------------

def knot_count(e0, e_min_post, e_max, r_bkg):
    """Number of spline control points for the post-edge fit.

    N = round(0.326 * r_bkg * (sqrt(e_max - e0) - sqrt(e_min_post - e0))),
    clamped to >= 4 (a cubic spline needs at least 4 knots).
    """
    if not (e_max > e_min_post >= e0):
        raise ValueError("need e_max > e_min_post >= e0")
    raw = KNOT_CONST * r_bkg * (np.sqrt(e_max - e0) - np.sqrt(e_min_post - e0))
    return max(4, int(np.floor(raw + 0.5)))


@dataclass(frozen=True)
class SplineBackground:
    knots_k: np.ndarray    # strictly increasing, equally spaced at construction
    knots_y: np.ndarray
    r_bkg: float
    e0: float

    def __post_init__(self):
        kk = np.asarray(self.knots_k, dtype=float)
        ky = np.asarray(self.knots_y, dtype=float)
        if kk.size != ky.size or kk.size < 4:
            raise ValueError("need at least 4 matching knots")
        if np.any(np.diff(kk) <= 0):
            raise ValueError("knot positions must be strictly increasing")
        object.__setattr__(self, "knots_k", kk)
        object.__setattr__(self, "knots_y", ky)

    def _spline(self):
        return CubicSpline(self.knots_k, self.knots_y, bc_type="natural",
                           extrapolate=True)

    def evaluate(self, e):
        e = np.asarray(e, dtype=float)
        k = np.sqrt(K_CONV * np.maximum(e - self.e0, 0.0))
        out = self._spline()(k)
        return float(out) if out.ndim == 0 else out

    def with_knot_y(self, knot_y):
        return replace(self, knots_y=np.asarray(knot_y, dtype=float))


def fit_spline_background(spectrum, e0, r_bkg=1.0, knot_y=None):
    """Place equally spaced k-space knots over [0, k_max] and seed their
    y-values with the local mean of mu around each knot.

    knot_y, when given, overrides the seeded values; this is the handle the
    interactive UI drags.
    """
    e = spectrum.energies
    mu = spectrum.mu
    if e[-1] - e0 < 50:
        raise FitError("post-edge span below 50 eV; spline background infeasible")
    post = e >= e0
    k = e_to_k(e[post], e0)
    mu_post = mu[post]
    k_max = k[-1]

    n = knot_count(e0, e0, e[-1], r_bkg)
    knots_k = np.linspace(0.0, k_max, n)
    if knot_y is not None:
        knots_y = np.asarray(knot_y, dtype=float)
        if knots_y.size != n:
            raise FitError(f"expected {n} knot values, got {knots_y.size}")
    else:
        knots_y = _seed_knot_y(k, mu_post, knots_k)
    return SplineBackground(knots_k=knots_k, knots_y=knots_y,
                            r_bkg=float(r_bkg), e0=float(e0))


def _seed_knot_y(k, mu_post, knots_k):
    half = 0.5 * (knots_k[1] - knots_k[0])
    knots_y = np.empty(knots_k.size)
    for i, kc in enumerate(knots_k):
        sel = np.abs(k - kc) <= half
        if np.any(sel):
            knots_y[i] = mu_post[sel].mean()
        else:
            knots_y[i] = mu_post[np.argmin(np.abs(k - kc))]
    return knots_y


# ---------------------------------------------------------------------------
# BQS
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BqsConfig:
    weights: tuple = (1.0, 1.0, 1.0, 1.0)  # mean, slope, sqrt(variance), symmetry
    p: float = 2.0                          # slope-denominator exponent

    def __post_init__(self):
        if len(self.weights) != 4 or any(w < 0 for w in self.weights):
            raise ValueError("need 4 nonnegative component weights")


def bqs(chi_k3, k, cfg=None):
    """Background quality score of a k^3-weighted chi signal.

    Returns (score, components) with components mean, slope, variance and
    symmetry reported individually (unweighted, before the absolute values
    entering the score).
    """
    cfg = cfg or BqsConfig()
    chi_k3 = np.asarray(chi_k3, dtype=float)
    k = np.asarray(k, dtype=float)
    if chi_k3.shape != k.shape or chi_k3.size < 2:
        raise ValueError("chi_k3 and k must match with at least 2 samples")

    mean = chi_k3.mean()
    k_bar = k.mean()
    dk = k - k_bar
    denom = np.sum(np.abs(dk) ** cfg.p)
    slope = np.sum(dk * (chi_k3 - mean)) / denom if denom > 0 else 0.0
    variance = np.mean((chi_k3 - mean) ** 2)
    pos = np.sum(np.abs(chi_k3[chi_k3 > 0]))
    neg = np.sum(np.abs(chi_k3[chi_k3 < 0]))
    symmetry = abs(pos - neg) / (pos + neg) if pos + neg != 0 else 0.0

    w1, w2, w3, w4 = cfg.weights
    score = (w1 * abs(mean) + w2 * abs(slope)
             + w3 * np.sqrt(variance) + w4 * symmetry)
    components = {"mean": float(mean), "slope": float(slope),
                  "variance": float(variance), "symmetry": float(symmetry)}
    return float(score), components


def _spline_bqs_objective(spectrum, e0, spline, cfg, edge_step):
    e = spectrum.energies
    post = e >= e0
    e_post = e[post]
    mu_post = spectrum.mu[post]
    k = e_to_k(e_post, e0)
    k3 = k ** 3
    knots_k = spline.knots_k
    # a physical background stays inside the measured envelope; penalize
    # knots that leave it so the BQS minimum cannot run away where the
    # k^3 weighting makes the score insensitive (low k)
    span = float(mu_post.max() - mu_post.min()) or 1.0
    lo = float(mu_post.min()) - 0.1 * span
    hi = float(mu_post.max()) + 0.1 * span

    def objective(knot_y):
        s = CubicSpline(knots_k, knot_y, bc_type="natural", extrapolate=True)
        chi_k3 = (mu_post - s(k)) / edge_step * k3
        score, _ = bqs(chi_k3, k, cfg)
        knot_y = np.asarray(knot_y, dtype=float)
        excess = (np.maximum(knot_y - hi, 0.0) + np.maximum(lo - knot_y, 0.0))
        return score + 1e4 * float(np.sum((excess / span) ** 2))

    return objective


def _knot_steps(spline, spectrum):
    # chi*k^3 amplifies a knot's influence by roughly k^3, so equalize the
    # score sensitivity across knots to keep the simplex well conditioned
    span = float(spectrum.mu.max() - spectrum.mu.min())
    sens = np.maximum(spline.knots_k, 1.0) ** 3
    return 0.5 * max(span, 1e-6) / sens


def _descend(objective, x0, base_step, budget):
    """Simplex descent with restarts over a shrinking step schedule.

    Each inner run converges when the score improves by less than 1e-6 over
    10 iterations; restarts continue until the iteration budget is spent or
    a full schedule cycle brings no improvement.
    """
    best = np.asarray(x0, dtype=float)
    best_score = objective(best)
    used = 0
    stale = 0
    cycle = (1.0, 0.3, 0.1, 0.03)
    i = 0
    while used < budget and stale < len(cycle):
        x, f, iters = nelder_mead(objective, best, step=base_step * cycle[i % 4],
                                  max_iter=budget - used, f_tol=1e-6,
                                  stall_iters=10)
        used += max(iters, 1)
        if f < best_score - 1e-6:
            stale = 0
        else:
            stale += 1
        if f < best_score:
            best, best_score = x, f
        i += 1
    return best, best_score


def refine_knots(spectrum, e0, spline, cfg=None, edge_step=1.0,
                 refine_positions=False):
    """Minimize the BQS of chi*k^3 over the knot y-values.

    Knot positions stay fixed (an optional flag also refines them).  Uses
    simplex descent with an iteration cap of 200 per knot and convergence
    when the score improves by less than 1e-6 over 10 iterations.  The
    returned spline never scores worse than the input.
    """
    cfg = cfg or BqsConfig()
    objective = _spline_bqs_objective(spectrum, e0, spline, cfg, edge_step)
    n = spline.knots_y.size
    y_steps = _knot_steps(spline, spectrum)

    if refine_positions:
        knots_k0 = spline.knots_k
        spacing = knots_k0[1] - knots_k0[0]

        def full_objective(params):
            ky, kk_inner = params[:n], params[n:]
            kk = np.concatenate(([knots_k0[0]], kk_inner, [knots_k0[-1]]))
            if np.any(np.diff(kk) <= 0):
                return np.inf
            s = CubicSpline(kk, ky, bc_type="natural", extrapolate=True)
            e = spectrum.energies
            post = e >= e0
            k = e_to_k(e[post], e0)
            chi_k3 = (spectrum.mu[post] - s(k)) / edge_step * k ** 3
            return bqs(chi_k3, k, cfg)[0]

        x0 = np.concatenate([spline.knots_y, knots_k0[1:-1]])
        steps = np.concatenate([y_steps, np.full(n - 2, 0.1 * spacing)])
        best, score = _descend(full_objective, x0, steps, 200 * n)
        kk = np.concatenate(([knots_k0[0]], best[n:], [knots_k0[-1]]))
        refined = replace(spline, knots_k=kk, knots_y=best[:n])
    else:
        # the BQS surface is nearly flat along low-k knots and carries
        # shallow local minima there; descend from the current knots and
        # from the data-driven seed, keeping whichever scores lower
        starts = [spline.knots_y]
        e = spectrum.energies
        post = e >= e0
        seed_y = _seed_knot_y(e_to_k(e[post], e0), spectrum.mu[post],
                              spline.knots_k)
        if not np.allclose(seed_y, spline.knots_y):
            starts.append(seed_y)
        best, score = min((_descend(objective, s0, y_steps, 200 * n)
                           for s0 in starts), key=lambda t: t[1])
        refined = spline.with_knot_y(best)

    if score > objective(spline.knots_y):
        return spline
    return refined


# ---------------------------------------------------------------------------
# polynomial engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyConfig:
    f_range: float = 0.6
    densify: int = 5
    hi_weight: float = 3.0
    post_min_offset: float = DEFAULT_POST_MIN_OFFSET
    # degree-3 promotion thresholds
    long_span_ev: float = 300.0
    min_points: int = 150
    min_edge_range_ev: float = 400.0

    def __post_init__(self):
        if not 0 < self.f_range < 1:
            raise ValueError("need 0 < f_range < 1")
        if self.densify < 1:
            raise ValueError("densify must be >= 1")


@dataclass(frozen=True)
class PolyBackground:
    coeffs: tuple          # coefficients in (E - e0), ascending degree
    degree: int
    e0: float
    e_threshold: float
    config: PolyConfig = field(default_factory=PolyConfig)

    def evaluate(self, e):
        x = np.asarray(e, dtype=float) - self.e0
        out = np.polynomial.polynomial.polyval(x, np.asarray(self.coeffs))
        return float(out) if out.ndim == 0 else out

    def coeffs_in_e(self):
        """Coefficients rebased to plain powers of E (ascending degree)."""
        p = np.polynomial.Polynomial(self.coeffs)
        shifted = p(np.polynomial.Polynomial([-self.e0, 1.0]))
        return tuple(shifted.coef)


def fit_poly_background(spectrum, e0, cfg=None):
    """Weighted polynomial post-edge fit with high-energy densification.

    The region E >= E_threshold = E_max - (E_max - e0)*f_range is densified
    by linear interpolation (factor `densify`) and up-weighted by
    `hi_weight`; this only shapes the fit, never the data.  Degree 3 is
    selected for long, well-sampled scans, degree 2 otherwise.
    """
    cfg = cfg or PolyConfig()
    e = spectrum.energies
    mu = spectrum.mu
    e_max = e[-1]
    post_start = e0 + cfg.post_min_offset
    mask = e >= min(post_start, e_max)
    e_post = e[mask]
    mu_post = mu[mask]
    if e_post.size < 4 or e_post[-1] - e_post[0] < 30:
        raise FitError("post-edge span below 30 eV; polynomial background infeasible")

    span = e_post[-1] - e_post[0]
    degree = 3 if (span >= cfg.long_span_ev and e_post.size >= cfg.min_points
                   and e_max - e0 >= cfg.min_edge_range_ev) else 2

    e_threshold = e_max - (e_max - e0) * cfg.f_range
    xs = [e_post]
    if cfg.densify > 1:
        hi = np.nonzero(e_post >= e_threshold)[0]
        extra = []
        for a, b in zip(hi[:-1], hi[1:]):
            if b == a + 1:
                extra.append(np.linspace(e_post[a], e_post[b],
                                         cfg.densify + 1)[1:-1])
        if extra:
            xs.append(np.concatenate(extra))
    x_fit = np.sort(np.concatenate(xs))
    y_fit = interpolate_linear(e_post, mu_post, x_fit)
    weights = np.where(x_fit >= e_threshold, cfg.hi_weight, 1.0)

    # np.polyfit applies w to residuals before squaring, hence sqrt
    coeffs_desc = np.polyfit(x_fit - e0, y_fit, degree, w=np.sqrt(weights))
    return PolyBackground(coeffs=tuple(coeffs_desc[::-1]), degree=degree,
                          e0=float(e0), e_threshold=float(e_threshold), config=cfg)


# ---------------------------------------------------------------------------
# edge step and normalization
# ---------------------------------------------------------------------------

def edge_step(pre, post, e0):
    """Edge-step height: S_post(e0) - S_pre(e0).  Must be positive."""
    step = float(post.evaluate(e0) - pre.evaluate(e0))
    if step <= 0:
        raise FitError("inverted edge: post-edge model below pre-edge at E0 "
                       "(check E0 and column roles)")
    return step


def normalize_flatten(spectrum, pre, post, step, e0):
    """Flattened, normalized spectrum: (mu - S_pre)/step below the edge,
    (mu - S_post + step)/step above it.  Continuous at E0 by construction
    of the edge step."""
    if step <= 0:
        raise FitError("edge step must be positive")
    e = spectrum.energies
    mu = spectrum.mu
    below = e <= e0
    out = np.empty_like(mu)
    out[below] = (mu[below] - pre.evaluate(e[below])) / step
    out[~below] = (mu[~below] - post.evaluate(e[~below]) + step) / step
    return NormalizedSpectrum(grid=EnergyGrid(e), mu_corrected=out,
                              e0=float(e0), edge_step=float(step))
