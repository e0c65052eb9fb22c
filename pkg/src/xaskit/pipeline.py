"""Pipeline orchestration: configuration, single-file processing, exports.

The CLI and the HTTP serve mode both call into this module, so the two
front ends produce identical numerical artifacts by construction.
"""
from __future__ import annotations

import configparser
import io
import json
import time
from dataclasses import dataclass

import numpy as np

from .background import (BqsConfig, PolyConfig, bqs, edge_step, fit_poly_background,
                         fit_preedge, fit_spline_background, normalize_flatten,
                         refine_knots)
from .errors import XasKitError
from .ftransform import extract_chi, forward_ft, k_weight, rbkg_filter
from .ingest import (compute_mu, detect_columns, infer_mode, parse_columnar,
                     parse_xdi, write_xdi)
from .model import FtParams, Spectrum, WindowKind, WindowSpec
from .signal import E0Method, SavGolParams, find_e0


@dataclass(frozen=True)
class PipelineConfig:
    e0_method: str = "smoothed_first_derivative"
    savgol_window: int = 7
    savgol_polyorder: int = 2
    pre_lo: float = -150.0       # eV relative to e0
    pre_hi: float = -30.0
    pre_degree: int = 1
    engine: str = "spline"       # spline | poly
    r_bkg: float = 1.0
    refine: bool = True
    bqs_weights: tuple = (1.0, 1.0, 1.0, 1.0)
    bqs_p: float = 2.0
    f_range: float = 0.6
    densify: int = 5
    hi_weight: float = 3.0
    post_min_offset: float = 50.0
    kw: int = 3
    window: str = "hanning"      # hanning | kaiser
    k_min: float | None = None   # None: full data range
    k_max: float | None = None
    dk: float = 1.0
    alpha: float = 5.0
    r_max: float = 8.0
    oversample: int = 8
    export_format: str = "xdi"   # xdi | columnar

    def e0_method_enum(self):
        return E0Method(self.e0_method)

    def savgol_params(self):
        return SavGolParams(self.savgol_window, self.savgol_polyorder)

    def bqs_config(self):
        return BqsConfig(weights=tuple(self.bqs_weights), p=self.bqs_p)

    def poly_config(self):
        return PolyConfig(f_range=self.f_range, densify=self.densify,
                          hi_weight=self.hi_weight,
                          post_min_offset=self.post_min_offset)

    def window_spec(self, k_data_min, k_data_max):
        k_min = self.k_min if self.k_min is not None else k_data_min
        k_max = self.k_max if self.k_max is not None else k_data_max
        return WindowSpec(kind=WindowKind(self.window), k_min=k_min,
                          k_max=k_max, dk=self.dk, alpha=self.alpha)

    # -- config file (ini-style key=value) ---------------------------------

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp["e0"] = {"method": self.e0_method,
                    "savgol_window": str(self.savgol_window),
                    "savgol_polyorder": str(self.savgol_polyorder)}
        cp["preedge"] = {"lo": repr(self.pre_lo), "hi": repr(self.pre_hi),
                         "degree": str(self.pre_degree)}
        cp["background"] = {
            "engine": self.engine, "r_bkg": repr(self.r_bkg),
            "refine": str(self.refine).lower(),
            "bqs_weights": " ".join(repr(w) for w in self.bqs_weights),
            "bqs_p": repr(self.bqs_p), "f_range": repr(self.f_range),
            "densify": str(self.densify), "hi_weight": repr(self.hi_weight),
            "post_min_offset": repr(self.post_min_offset)}
        cp["ft"] = {"k_weight": str(self.kw), "window": self.window,
                    "k_min": "auto" if self.k_min is None else repr(self.k_min),
                    "k_max": "auto" if self.k_max is None else repr(self.k_max),
                    "dk": repr(self.dk), "alpha": repr(self.alpha),
                    "r_max": repr(self.r_max), "oversample": str(self.oversample)}
        cp["export"] = {"format": self.export_format}
        buf = io.StringIO()
        buf.write("# xaskit pipeline configuration\n")
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text):
        cp = configparser.ConfigParser()
        cp.read_string(text)

        def opt_float(section, key):
            raw = cp.get(section, key)
            return None if raw == "auto" else float(raw)

        return cls(
            e0_method=cp.get("e0", "method"),
            savgol_window=cp.getint("e0", "savgol_window"),
            savgol_polyorder=cp.getint("e0", "savgol_polyorder"),
            pre_lo=cp.getfloat("preedge", "lo"),
            pre_hi=cp.getfloat("preedge", "hi"),
            pre_degree=cp.getint("preedge", "degree"),
            engine=cp.get("background", "engine"),
            r_bkg=cp.getfloat("background", "r_bkg"),
            refine=cp.getboolean("background", "refine"),
            bqs_weights=tuple(float(w) for w in
                              cp.get("background", "bqs_weights").split()),
            bqs_p=cp.getfloat("background", "bqs_p"),
            f_range=cp.getfloat("background", "f_range"),
            densify=cp.getint("background", "densify"),
            hi_weight=cp.getfloat("background", "hi_weight"),
            post_min_offset=cp.getfloat("background", "post_min_offset"),
            kw=cp.getint("ft", "k_weight"),
            window=cp.get("ft", "window"),
            k_min=opt_float("ft", "k_min"),
            k_max=opt_float("ft", "k_max"),
            dk=cp.getfloat("ft", "dk"),
            alpha=cp.getfloat("ft", "alpha"),
            r_max=cp.getfloat("ft", "r_max"),
            oversample=cp.getint("ft", "oversample"),
            export_format=cp.get("export", "format"),
        )


@dataclass
class PipelineResult:
    spectrum: Spectrum
    e0: float
    e0_by_method: dict
    pre: object
    post: object
    step: float
    normalized: object
    chi: object               # weight 0
    chi_weighted: object
    ft_params: FtParams
    rspec: object
    chi_filtered: object
    r_filtered: object
    bqs_score: float
    bqs_components: dict
    report: dict


def load_any(text, meta=None, label_table=None):
    """Parse XDI or generic columnar text into (spectrum, roles_report)."""
    if text.lstrip().startswith("# XDI/"):
        parsed, _ = parse_xdi(text)
        if isinstance(parsed, Spectrum):
            return parsed, {"source": "xdi", "roles": {"mu": "xdi"}}
        scan = parsed
    else:
        scan = parse_columnar(text, meta=meta)
    roles = detect_columns(scan, label_table=label_table)
    mode = infer_mode(roles)
    spectrum = compute_mu(scan, roles, mode)
    return spectrum, {"source": "columnar", "roles": roles.report,
                      "parse": scan.parse_report, "mode": mode.value}


def run_pipeline(spectrum, config=None, knot_y=None):
    """Carry a Spectrum through E0, background, normalization, chi and FT.

    knot_y overrides the spline knot values (spline engine only); automatic
    refinement is skipped in that case so manual adjustments stick.
    """
    config = config or PipelineConfig()
    timings = {}
    t0 = time.perf_counter()

    sg = config.savgol_params()
    e0_by_method = {}
    for method in E0Method:
        try:
            e0_by_method[method.value] = find_e0(spectrum, method, params=sg)
        except XasKitError as exc:
            e0_by_method[method.value] = f"error: {exc}"
    e0 = e0_by_method[config.e0_method]
    if not isinstance(e0, float):
        raise XasKitError(f"E0 determination failed: {e0}")
    timings["e0"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    pre = fit_preedge(spectrum, e0, (e0 + config.pre_lo, e0 + config.pre_hi),
                      config.pre_degree)
    knots = None
    if config.engine == "spline":
        post = fit_spline_background(spectrum, e0, r_bkg=config.r_bkg,
                                     knot_y=knot_y)
        step = edge_step(pre, post, e0)
        if config.refine and knot_y is None:
            post = refine_knots(spectrum, e0, post, config.bqs_config(),
                                edge_step=step)
            step = edge_step(pre, post, e0)
        knots = {"k": post.knots_k.tolist(), "y": post.knots_y.tolist()}
    elif config.engine == "poly":
        post = fit_poly_background(spectrum, e0, config.poly_config())
        step = edge_step(pre, post, e0)
    else:
        raise XasKitError(f"unknown background engine {config.engine!r}")
    normalized = normalize_flatten(spectrum, pre, post, step, e0)
    timings["background"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    chi = extract_chi(spectrum, post, step, e0)
    chi_w = k_weight(chi, config.kw)
    score, components = bqs(chi.chi * chi.k ** 3, chi.k, config.bqs_config())

    window = config.window_spec(chi.k[0], chi.k[-1])
    params = FtParams(r_max=config.r_max, r_bkg=config.r_bkg,
                      oversample=config.oversample, window=window)
    rspec = forward_ft(chi_w, params)
    chi_filtered, r_filtered = rbkg_filter(chi_w, params)
    timings["ft"] = time.perf_counter() - t0

    report = {
        "e0": e0,
        "e0_by_method": e0_by_method,
        "edge_step": step,
        "engine": config.engine,
        "bqs": {"score": score, **components},
        "knots": knots,
        "timings_s": timings,
    }
    return PipelineResult(spectrum=spectrum, e0=e0, e0_by_method=e0_by_method,
                          pre=pre, post=post, step=step, normalized=normalized,
                          chi=chi, chi_weighted=chi_w, ft_params=params,
                          rspec=rspec, chi_filtered=chi_filtered,
                          r_filtered=r_filtered, bqs_score=score,
                          bqs_components=components, report=report)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def write_columnar(labels, columns, header_lines=()):
    out = [f"# {line}" for line in header_lines]
    out.append("# " + "  ".join(f"{label:>18s}" for label in labels).strip())
    for i in range(len(columns[0])):
        out.append("  ".join(f"{col[i]:>18.12g}" for col in columns))
    return "\n".join(out) + "\n"


def export_normalized(result, fmt="xdi"):
    labels = ["energy", "mu", "norm"]
    columns = [result.spectrum.energies, result.spectrum.mu,
               result.normalized.mu_corrected]
    meta = result.spectrum.meta
    meta = meta.with_extra("xaskit.e0", f"{result.e0:.12g}")
    meta = meta.with_extra("xaskit.edge_step", f"{result.step:.12g}")
    if fmt == "xdi":
        return write_xdi((labels, columns), meta)
    if fmt == "columnar":
        return write_columnar(labels, columns,
                              [f"e0 = {result.e0:.12g}",
                               f"edge_step = {result.step:.12g}"])
    raise XasKitError(f"unknown export format {fmt!r}")


def export_chi(result):
    chi = result.chi
    return write_columnar(["k", "chi", f"chi_k{result.chi_weighted.weight}"],
                          [chi.k, chi.chi, result.chi_weighted.chi])


def export_rspace(result):
    r = result.rspec
    return write_columnar(["r", "magnitude", "real", "imag"],
                          [r.r, np.abs(r.values), r.values.real, r.values.imag])


def process_text(text, config=None, label_table=None):
    """Full pipeline on raw file text; returns (result, ingest_report)."""
    spectrum, ingest_report = load_any(text, label_table=label_table)
    result = run_pipeline(spectrum, config)
    result.report["ingest"] = ingest_report
    return result, ingest_report


def process_file(path, config=None, out_dir=None, label_table=None):
    """Process one file and write the per-stage artifacts next to out_dir.

    Returns the report dict.  Artifacts: <stem>.norm.(xdi|dat),
    <stem>.chi.dat, <stem>.rspace.dat, <stem>.report.json.
    """
    import pathlib

    path = pathlib.Path(path)
    config = config or PipelineConfig()
    out = pathlib.Path(out_dir) if out_dir else path.parent
    out.mkdir(parents=True, exist_ok=True)

    text = path.read_text(errors="replace")
    result, _ = process_text(text, config, label_table=label_table)

    stem = path.stem
    ext = "xdi" if config.export_format == "xdi" else "dat"
    (out / f"{stem}.norm.{ext}").write_text(
        export_normalized(result, config.export_format))
    (out / f"{stem}.chi.dat").write_text(export_chi(result))
    (out / f"{stem}.rspace.dat").write_text(export_rspace(result))
    (out / f"{stem}.report.json").write_text(
        json.dumps(result.report, indent=2, sort_keys=True) + "\n")
    return result.report
