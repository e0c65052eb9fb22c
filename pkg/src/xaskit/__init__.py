"""xaskit: XAS data reduction from raw beamline files to R-space.

Ingestion of heterogeneous columnar formats and XDI, mu(E) construction,
edge detection, spline/polynomial background subtraction with BQS-driven
knot refinement, normalization and flattening, EXAFS chi(k) extraction,
k-weighting and windowed Riemann-sum Fourier transforms.
"""

__version__ = "0.1.0"

from .core import K_CONV, KNOT_CONST, e_to_k, interpolate_linear, k_to_e
from .errors import (ColumnDetectionError, DomainError, FitError, MergeError,
                     MuError, ParseError, RangeError, XasKitError, XdiFormatError)
from .model import (AcquisitionMode, ChiSpectrum, EnergyGrid, FtParams, Metadata,
                    NormalizedSpectrum, RSpectrum, Spectrum, WindowKind, WindowSpec)
from .ingest import (ColumnRoles, RawScan, compute_mu, detect_columns, infer_mode,
                     merge_scans, parse_columnar, parse_xdi, write_xdi)
from .signal import E0Method, SavGolParams, derivative, find_e0, savgol
from .background import (BqsConfig, PolyBackground, PolyConfig, PreEdgeModel,
                         SplineBackground, bqs, edge_step, fit_poly_background,
                         fit_preedge, fit_spline_background, knot_count,
                         normalize_flatten, refine_knots)
from .ftransform import (bessel_i0, extract_chi, forward_ft, inverse_ft, k_weight,
                         rbkg_filter, window_values, windowed)
from .pipeline import PipelineConfig, load_any, process_file, run_pipeline
