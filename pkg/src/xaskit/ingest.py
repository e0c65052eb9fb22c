"""Parsing of heterogeneous beamline files and XDI, column detection, mu(E).

Beamline text formats vary wildly in comment conventions, separators and
column naming; the parser is deliberately permissive (bad rows are dropped
and counted, not fatal) and the label table is data driven so it can be
extended per facility.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import interpolate_linear
from .errors import ColumnDetectionError, MergeError, MuError, ParseError, XdiFormatError
from .model import AcquisitionMode, EnergyGrid, Metadata, Spectrum

_COMMENT_CHARS = ("#", ";", "%")

# Role -> (exact label matches, prefix matches); all case-insensitive.
DEFAULT_LABEL_TABLE = {
    "energy": ({"energy", "e", "en", "mono_energy", "mono energy",
                "energy (ev)", "energy(ev)", "energy_ev"}, ()),
    "i0": ({"i0", "io", "mon", "monitor"}, ()),
    "it": ({"it", "i1", "trans", "itrans"}, ()),
    "fluor": ({"if", "ifluor"}, ("sdd", "fl", "mca")),
    "mu": ({"mu", "mutrans", "mufluor", "norm"}, ()),
}


@dataclass(frozen=True)
class RawScan:
    columns: tuple  # of (label, np.ndarray) pairs
    header_lines: tuple = ()
    meta: Metadata = field(default_factory=Metadata)
    parse_report: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.columns:
            raise ValueError("scan has no columns")
        n = len(self.columns[0][1])
        if n < 2:
            raise ValueError("scan columns need at least 2 rows")
        for _, vals in self.columns:
            if len(vals) != n:
                raise ValueError("scan columns have differing lengths")
        folded = [label.strip().casefold() for label, _ in self.columns]
        if len(set(folded)) != len(folded):
            raise ValueError("column labels not unique after case folding")

    @property
    def labels(self):
        return [label for label, _ in self.columns]

    def column(self, index):
        return np.asarray(self.columns[index][1], dtype=float)

    @property
    def n_rows(self):
        return len(self.columns[0][1])


@dataclass(frozen=True)
class ColumnRoles:
    energy: int
    i0: int | None = None
    it: int | None = None
    i_fluor: tuple | None = None
    mu_direct: int | None = None
    report: dict = field(default_factory=dict)

    def has_mu_source(self):
        return (
            self.mu_direct is not None
            or (self.i0 is not None and self.it is not None)
            or (self.i0 is not None and self.i_fluor)
        )


def _dedupe_labels(labels):
    seen = {}
    out = []
    for label in labels:
        key = label.strip().casefold()
        if key in seen:
            seen[key] += 1
            out.append(f"{label}_{seen[key]}")
        else:
            seen[key] = 1
            out.append(label)
    return out


def parse_columnar(text, meta=None):
    """Parse a generic whitespace/comma separated beamline text file.

    Comment lines start with '#', ';' or '%'.  The last header line whose
    token count matches the data column count supplies the labels; otherwise
    columns are named col0..colN.  Rows with non-numeric tokens or a
    deviating column count are skipped and counted, but if more than 10% of
    rows deviate in column count the file is rejected.
    """
    if not isinstance(text, str):
        raise ParseError("input must be text")
    if not text.strip():
        raise ParseError("empty input")

    header_lines = []
    data_rows = []  # (line_no, [floats])
    bad_rows = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(_COMMENT_CHARS):
            header_lines.append(stripped)
            continue
        tokens = stripped.replace(",", " ").split()
        try:
            values = [float(tok) for tok in tokens]
        except ValueError:
            bad_rows += 1
            continue
        if not values:
            bad_rows += 1
            continue
        data_rows.append((line_no, values))

    if len(data_rows) < 2:
        raise ParseError(f"fewer than 2 numeric data rows (got {len(data_rows)})")

    counts = np.array([len(vals) for _, vals in data_rows])
    ncols = int(np.bincount(counts).argmax())
    offenders = [line_no for (line_no, vals) in data_rows if len(vals) != ncols]
    if len(offenders) > 0.1 * len(data_rows):
        shown = ", ".join(str(n) for n in offenders[:20])
        raise ParseError(
            f"inconsistent column counts on {len(offenders)} of {len(data_rows)} "
            f"rows (lines {shown})"
        )
    rows = [vals for _, vals in data_rows if len(vals) == ncols]
    if len(rows) < 2:
        raise ParseError("fewer than 2 consistent numeric rows")
    data = np.array(rows, dtype=float)

    labels = None
    for line in header_lines:
        tokens = line.lstrip("".join(_COMMENT_CHARS)).strip().replace(",", " ").split()
        if len(tokens) == ncols:
            labels = tokens  # keep scanning: last matching header line wins
    if labels is None:
        labels = [f"col{i}" for i in range(ncols)]
    labels = _dedupe_labels(labels)

    columns = tuple((labels[i], data[:, i]) for i in range(ncols))
    report = {
        "rows": len(rows),
        "rows_skipped_nonnumeric": bad_rows,
        "rows_skipped_column_count": len(offenders),
        "labels_from_header": labels[0] != "col0" or ncols == 0,
    }
    return RawScan(columns=columns, header_lines=tuple(header_lines),
                   meta=meta or Metadata(), parse_report=report)


def _is_strictly_monotonic(values):
    d = np.diff(values)
    return bool(np.all(d > 0) or np.all(d < 0))


def detect_columns(scan, label_table=None):
    """Assign column roles by prioritized label matching with a monotonic
    fallback for the energy axis."""
    table = label_table or DEFAULT_LABEL_TABLE
    folded = [label.strip().casefold() for label in scan.labels]

    def match(role):
        exact, prefixes = table[role]
        hits = []
        for i, name in enumerate(folded):
            if name in exact or any(name.startswith(p) for p in prefixes):
                hits.append(i)
        return hits

    report = {}
    energy_hits = match("energy")
    if energy_hits:
        energy = energy_hits[0]
        report["energy"] = f"label:{scan.labels[energy]}"
    else:
        energy = None
        for i in range(len(scan.labels)):
            if _is_strictly_monotonic(scan.column(i)):
                energy = i
                break
        if energy is None:
            raise ColumnDetectionError("no energy axis")
        report["energy"] = "heuristic:first-monotonic"

    def first_other(hits):
        for i in hits:
            if i != energy:
                return i
        return None

    i0 = first_other(match("i0"))
    it = first_other(match("it"))
    fluor = tuple(i for i in match("fluor") if i != energy) or None
    mu = first_other(match("mu"))

    if i0 is not None:
        report["i0"] = f"label:{scan.labels[i0]}"
    if it is not None:
        report["it"] = f"label:{scan.labels[it]}"
    if fluor:
        report["i_fluor"] = [f"label:{scan.labels[i]}" for i in fluor]
    if mu is not None:
        report["mu"] = f"label:{scan.labels[mu]}"

    # Heuristic fallback: unlabeled scans are assumed energy followed by i0.
    if i0 is None and it is None and not fluor and mu is None:
        if energy + 1 < len(scan.labels):
            i0 = energy + 1
            report["i0"] = "heuristic:column-after-energy"
    return ColumnRoles(energy=energy, i0=i0, it=it, i_fluor=fluor,
                       mu_direct=mu, report=report)


def infer_mode(roles):
    """Pick the acquisition mode the detected roles support."""
    if roles.i0 is not None and roles.it is not None:
        return AcquisitionMode.TRANSMISSION
    if roles.i0 is not None and roles.i_fluor:
        return AcquisitionMode.FLUORESCENCE
    if roles.mu_direct is not None:
        return AcquisitionMode.TRANSMISSION
    raise ColumnDetectionError("detected roles support no acquisition mode")


def compute_mu(scan, roles, mode):
    """Build mu(E) from the detected columns.

    Transmission: mu = ln(I0/It); fluorescence and TEY: mu = sum(If)/I0 with
    the selected channels merged.  Rows with nonpositive I0 (or It for
    transmission) are dropped and counted; the output grid is sorted and
    exact duplicate energies averaged.
    """
    energy = scan.column(roles.energy)
    dropped = 0

    if roles.mu_direct is not None and (roles.i0 is None or
                                        (roles.it is None and not roles.i_fluor)):
        mu = scan.column(roles.mu_direct)
        valid = np.isfinite(mu) & np.isfinite(energy)
    elif mode is AcquisitionMode.TRANSMISSION:
        if roles.i0 is None or roles.it is None:
            raise MuError("transmission mode needs i0 and it columns")
        i0 = scan.column(roles.i0)
        it = scan.column(roles.it)
        if np.count_nonzero(i0 <= 0) > 0.5 * i0.size:
            raise MuError("dead monitor: more than half of I0 is nonpositive")
        valid = (i0 > 0) & (it > 0) & np.isfinite(i0) & np.isfinite(it) & np.isfinite(energy)
        mu = np.zeros_like(energy)
        mu[valid] = np.log(i0[valid] / it[valid])
    else:
        if roles.i0 is None or not roles.i_fluor:
            raise MuError("fluorescence/TEY mode needs i0 and at least one detector channel")
        i0 = scan.column(roles.i0)
        if np.count_nonzero(i0 <= 0) > 0.5 * i0.size:
            raise MuError("dead monitor: more than half of I0 is nonpositive")
        i_f = np.sum([scan.column(i) for i in roles.i_fluor], axis=0)
        valid = (i0 > 0) & np.isfinite(i0) & np.isfinite(i_f) & np.isfinite(energy)
        mu = np.zeros_like(energy)
        mu[valid] = i_f[valid] / i0[valid]

    dropped = int(np.count_nonzero(~valid))
    energy = energy[valid]
    mu = mu[valid]
    if energy.size < 2:
        raise MuError(f"all rows invalid ({dropped} dropped)")

    order = np.argsort(energy, kind="stable")
    energy = energy[order]
    mu = mu[order]
    uniq, inverse = np.unique(energy, return_inverse=True)
    if uniq.size != energy.size:
        sums = np.bincount(inverse, weights=mu)
        counts = np.bincount(inverse)
        mu = sums / counts
        energy = uniq
    if energy.size < 2:
        raise MuError("fewer than 2 distinct energies")

    meta = scan.meta.with_extra("xaskit.dropped_rows", str(dropped))
    return Spectrum(grid=EnergyGrid(energy), mu=mu, mode=mode, meta=meta)


def merge_scans(spectra):
    """Average spectra on the energy grid of the first scan.

    The first grid is clipped to the range common to all inputs; each input
    must overlap the first grid by at least 50%.
    """
    if not spectra:
        raise MergeError("no spectra to merge")
    first = spectra[0]
    if len(spectra) == 1:
        return Spectrum(grid=first.grid, mu=first.mu, mode=first.mode,
                        meta=first.meta.with_extra("xaskit.merged_count", "1"))
    for s in spectra[1:]:
        if (s.meta.element, s.meta.edge) != (first.meta.element, first.meta.edge):
            raise MergeError("cannot merge spectra with different element/edge")

    base = first.energies
    lo = max(s.energies[0] for s in spectra)
    hi = min(s.energies[-1] for s in spectra)
    inside = (base >= lo) & (base <= hi)
    span = base[-1] - base[0]
    if hi <= lo or (hi - lo) < 0.5 * span or np.count_nonzero(inside) < 2:
        raise MergeError("energy ranges overlap by less than 50%")
    grid = base[inside]
    stacked = np.array([interpolate_linear(s.energies, s.mu, grid) for s in spectra])
    mu = stacked.mean(axis=0)
    meta = first.meta.with_extra("xaskit.merged_count", str(len(spectra)))
    return Spectrum(grid=EnergyGrid(grid), mu=mu, mode=first.mode, meta=meta)


# ---------------------------------------------------------------------------
# XDI
# ---------------------------------------------------------------------------

_XDI_META_MAP = {
    "element.symbol": "element",
    "element.edge": "edge",
    "sample.name": "sample_name",
    "beamline.name": "beamline",
    "facility.name": "facility",
}


def parse_xdi(text):
    """Parse an XDI document.

    Returns (Spectrum or RawScan, Metadata): a Spectrum when an energy and a
    direct-mu column can be resolved, the RawScan otherwise.  Warnings (e.g.
    missing Element.*) are recorded in Metadata.extra under xaskit.warnings.
    """
    lines = text.splitlines()
    if not lines or not lines[0].lstrip().startswith("# XDI/"):
        raise XdiFormatError("missing '# XDI/' version line")

    extra = {}
    fields = {}
    warnings = []
    header_lines = [lines[0].strip()]
    label_line = None
    data_start = None
    in_comments = False
    for idx, line in enumerate(lines[1:], start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if not stripped.startswith("#"):
            data_start = idx
            break
        header_lines.append(stripped)
        body = stripped.lstrip("#").strip()
        if body.startswith("///"):
            in_comments = True
            continue
        if body.startswith("---"):
            in_comments = False
            continue
        if in_comments:
            continue
        if ":" in body and "." in body.split(":", 1)[0]:
            tag, value = body.split(":", 1)
            key = tag.strip().casefold()
            if key in extra:
                raise XdiFormatError(f"duplicate header tag {tag.strip()}")
            extra[key] = value.strip()
            mapped = _XDI_META_MAP.get(key)
            if mapped:
                fields[mapped] = value.strip()
        else:
            label_line = body
    if data_start is None:
        raise XdiFormatError("no data table found")
    if "element" not in fields:
        warnings.append("missing Element.symbol")
    if "edge" not in fields:
        warnings.append("missing Element.edge")
    if warnings:
        extra["xaskit.warnings"] = "; ".join(warnings)

    meta = Metadata(element=fields.get("element", ""), edge=fields.get("edge", ""),
                    sample_name=fields.get("sample_name", ""),
                    beamline=fields.get("beamline", ""),
                    facility=fields.get("facility", ""), extra=extra)

    table = "\n".join(lines[data_start:])
    if label_line:
        table = "# " + label_line + "\n" + table
    scan = parse_columnar(table, meta=meta)
    roles = detect_columns(scan)
    if roles.mu_direct is not None:
        spectrum = compute_mu(scan, ColumnRoles(energy=roles.energy,
                                                mu_direct=roles.mu_direct,
                                                report=roles.report),
                              AcquisitionMode.TRANSMISSION)
        return spectrum, meta
    return scan, meta


def _format_value(v):
    return f"{v:.12g}"


def write_xdi(spec, meta=None, comments=()):
    """Serialize a Spectrum (or (labels, columns) product) to XDI text.

    Numbers are printed at 12 significant digits in fixed-width columns, so
    parse_xdi(write_xdi(s)) round-trips bit-exactly at that precision.
    """
    if isinstance(spec, Spectrum):
        labels = ["energy", "mu"]
        columns = [spec.energies, spec.mu]
        meta = meta if meta is not None else spec.meta
    else:
        labels, columns = spec
        meta = meta if meta is not None else Metadata()

    extra = dict(meta.extra)
    for key, attr in _XDI_META_MAP.items():
        value = getattr(meta, attr)
        if value and key not in extra:
            extra[key] = value
    extra.pop("xaskit.warnings", None)

    out = [f"# XDI/1.0 xaskit/{__version__}"]
    for key in sorted(extra, key=lambda s: (s.split(".")[0], s)):
        namespace, _, tag = key.partition(".")
        tag_disp = f"{namespace.capitalize()}.{tag}" if tag else key
        out.append(f"# {tag_disp}: {extra[key]}")
    out.append("# ///")
    for comment in comments:
        out.append(f"# {comment}")
    out.append("# ----")
    out.append("# " + "  ".join(f"{label:>18s}" for label in labels).strip())
    n = len(columns[0])
    for i in range(n):
        out.append("  ".join(f"{_format_value(col[i]):>18s}" for col in columns))
    return "\n".join(out) + "\n"
