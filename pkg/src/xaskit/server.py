"""HTTP serve mode: in-memory sessions over the processing pipeline.

All numbers returned by the API come from the library, so CLI and serve
exports are byte-identical for the same config.  Each session allows one
in-flight mutation; a second concurrent mutation is rejected with 409.
"""
from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field, replace

import numpy as np
from fastapi import Body, FastAPI, HTTPException, Request, Response
from fastapi.responses import PlainTextResponse

from .errors import XasKitError
from .ingest import AcquisitionMode, ColumnRoles, compute_mu
from .model import Spectrum
from .pipeline import (PipelineConfig, export_chi, export_normalized,
                       export_rspace, run_pipeline)
from .background import refine_knots
from .signal import E0Method

SESSION_TTL_S = 30 * 60


@dataclass
class Session:
    id: str
    text: str
    spectrum: Spectrum
    ingest_report: dict
    scan: object = None          # RawScan when the source was columnar
    config: PipelineConfig = field(default_factory=PipelineConfig)
    knot_y: np.ndarray | None = None
    last_access: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _cache_key: tuple = None
    _cache_result: object = None

    def result(self):
        key = (self.config, None if self.knot_y is None else tuple(self.knot_y),
               id(self.spectrum))
        if key != self._cache_key:
            self._cache_result = run_pipeline(self.spectrum, self.config,
                                              knot_y=self.knot_y)
            self._cache_key = key
        return self._cache_result

    def invalidate(self):
        self._cache_key = None


def _series(arr):
    return np.asarray(arr, dtype=float).tolist()


def _background_payload(session):
    res = session.result()
    e = res.spectrum.energies
    post_mask = e >= res.e0
    chi = res.chi
    payload = {
        "engine": session.config.engine,
        "e0": res.e0,
        "edge_step": res.step,
        "energy": _series(e),
        "mu": _series(res.spectrum.mu),
        "s_post": _series(res.post.evaluate(e[post_mask])),
        "s_post_energy": _series(e[post_mask]),
        "norm": _series(res.normalized.mu_corrected),
        "k": _series(chi.k),
        "chi_k3": _series(chi.chi * chi.k ** 3),
        "bqs": {"score": res.bqs_score, **res.bqs_components},
    }
    if session.config.engine == "spline":
        payload["knots"] = {"k": _series(res.post.knots_k),
                            "y": _series(res.post.knots_y)}
    return payload


def _ft_payload(session):
    res = session.result()
    return {
        "weight": res.chi_weighted.weight,
        "k": _series(res.chi_weighted.k),
        "chi_weighted": _series(res.chi_weighted.chi),
        "chi_filtered": _series(res.chi_filtered.chi),
        "r": _series(res.rspec.r),
        "magnitude": _series(np.abs(res.rspec.values)),
        "real": _series(res.rspec.values.real),
        "imag": _series(res.rspec.values.imag),
        "magnitude_filtered": _series(np.abs(res.r_filtered.values)),
    }


def create_app():
    app = FastAPI(title="xaskit", docs_url=None, redoc_url=None)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    app.state.sessions = sessions

    def purge():
        now = time.monotonic()
        with registry_lock:
            for sid in [sid for sid, s in sessions.items()
                        if now - s.last_access > SESSION_TTL_S]:
                del sessions[sid]

    def get_session(sid):
        purge()
        with registry_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, detail=f"unknown session {sid}")
        session.last_access = time.monotonic()
        return session

    def mutate(session):
        if not session.lock.acquire(blocking=False):
            raise HTTPException(409, detail="a mutation is already in flight")
        return session

    @app.exception_handler(XasKitError)
    async def _xaskit_error(request, exc):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=400,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.post("/api/session", status_code=201)
    async def create_session(request: Request):
        from .ingest import detect_columns, infer_mode, parse_columnar, parse_xdi
        text = (await request.body()).decode("utf-8", errors="replace")
        scan = None
        if text.lstrip().startswith("# XDI/"):
            parsed, _ = parse_xdi(text)
            if isinstance(parsed, Spectrum):
                spectrum = parsed
                report = {"source": "xdi", "roles": {"mu": "xdi"}}
            else:
                scan = parsed
        else:
            scan = parse_columnar(text)
        if scan is not None:
            roles = detect_columns(scan)
            mode = infer_mode(roles)
            spectrum = compute_mu(scan, roles, mode)
            report = {"source": "columnar", "roles": roles.report,
                      "parse": scan.parse_report, "mode": mode.value}
        sid = secrets.token_hex(8)
        session = Session(id=sid, text=text, spectrum=spectrum,
                          ingest_report=report, scan=scan)
        with registry_lock:
            sessions[sid] = session
        res = session.result()
        return {"id": sid, "report": report,
                "labels": scan.labels if scan is not None else ["energy", "mu"],
                "energy": _series(spectrum.energies),
                "mu": _series(spectrum.mu),
                "e0": res.e0}

    @app.get("/api/session/{sid}")
    def snapshot(sid: str):
        session = get_session(sid)
        from dataclasses import asdict
        cfg = asdict(session.config)
        cfg["bqs_weights"] = list(cfg["bqs_weights"])
        return {"id": sid, "report": session.ingest_report, "config": cfg,
                "knot_y_override": None if session.knot_y is None
                else _series(session.knot_y),
                "background": _background_payload(session),
                "ft": _ft_payload(session)}

    @app.post("/api/session/{sid}/columns")
    def set_columns(sid: str, payload: dict = Body(...)):
        session = mutate(get_session(sid))
        try:
            if session.scan is None:
                raise XasKitError("source file provides mu directly; "
                                  "no columns to override")
            roles = ColumnRoles(
                energy=int(payload["energy"]),
                i0=payload.get("i0"),
                it=payload.get("it"),
                i_fluor=tuple(payload["i_fluor"]) if payload.get("i_fluor") else None,
                mu_direct=payload.get("mu"),
                report={"override": "user"})
            mode = AcquisitionMode(payload.get("mode", "transmission"))
            session.spectrum = compute_mu(session.scan, roles, mode)
            session.ingest_report = {"source": "columnar",
                                     "roles": roles.report, "mode": mode.value}
            session.knot_y = None
            session.invalidate()
            res = session.result()
            return {"energy": _series(session.spectrum.energies),
                    "mu": _series(session.spectrum.mu), "e0": res.e0}
        except KeyError as exc:
            raise HTTPException(400, detail=f"missing field {exc}")
        finally:
            session.lock.release()

    @app.post("/api/session/{sid}/e0")
    def set_e0(sid: str, payload: dict = Body(...)):
        session = mutate(get_session(sid))
        try:
            method = E0Method(payload["method"])
            session.config = replace(session.config, e0_method=method.value)
            session.invalidate()
            res = session.result()
            return {"e0": res.e0, "e0_by_method": res.e0_by_method}
        except (KeyError, ValueError) as exc:
            raise HTTPException(400, detail=f"bad e0 method: {exc}")
        finally:
            session.lock.release()

    @app.post("/api/session/{sid}/background")
    def set_background(sid: str, payload: dict = Body(default={})):
        session = mutate(get_session(sid))
        try:
            updates = {}
            if "engine" in payload:
                if payload["engine"] not in ("spline", "poly"):
                    raise HTTPException(400, detail="engine must be spline or poly")
                updates["engine"] = payload["engine"]
            if "r_bkg" in payload:
                updates["r_bkg"] = float(payload["r_bkg"])
            for key in ("f_range", "hi_weight"):
                if key in payload:
                    updates[key] = float(payload[key])
            if "densify" in payload:
                updates["densify"] = int(payload["densify"])
            if updates:
                session.config = replace(session.config, **updates)
            if "knot_y" in payload:
                session.knot_y = (None if payload["knot_y"] is None
                                  else np.asarray(payload["knot_y"], dtype=float))
            elif updates.get("engine") or "r_bkg" in updates:
                session.knot_y = None  # knot table shape may change
            session.invalidate()
            return _background_payload(session)
        finally:
            session.lock.release()

    @app.post("/api/session/{sid}/refine")
    def refine(sid: str):
        session = mutate(get_session(sid))
        try:
            if session.config.engine != "spline":
                raise XasKitError("refinement applies to the spline engine only")
            res = session.result()
            refined = refine_knots(session.spectrum, res.e0, res.post,
                                   session.config.bqs_config(),
                                   edge_step=res.step)
            session.knot_y = refined.knots_y.copy()
            session.invalidate()
            return _background_payload(session)
        finally:
            session.lock.release()

    @app.post("/api/session/{sid}/ft")
    def set_ft(sid: str, payload: dict = Body(default={})):
        session = mutate(get_session(sid))
        try:
            updates = {}
            if "weight" in payload:
                updates["kw"] = int(payload["weight"])
            if "r_max" in payload:
                updates["r_max"] = float(payload["r_max"])
            if "r_bkg" in payload:
                updates["r_bkg"] = float(payload["r_bkg"])
            window = payload.get("window", {})
            for src, dst in [("kind", "window"), ("k_min", "k_min"),
                             ("k_max", "k_max"), ("dk", "dk"), ("alpha", "alpha")]:
                if src in window:
                    updates[dst] = window[src]
            if updates:
                session.config = replace(session.config, **updates)
                session.invalidate()
            return _ft_payload(session)
        finally:
            session.lock.release()

    @app.get("/api/session/{sid}/export")
    def export(sid: str, format: str = "xdi"):
        session = get_session(sid)
        res = session.result()
        if format in ("xdi", "columnar"):
            text = export_normalized(res, format)
        elif format == "chi":
            text = export_chi(res)
        elif format == "rspace":
            text = export_rspace(res)
        elif format == "original":
            text = session.text
        else:
            raise HTTPException(400, detail=f"unknown export format {format!r}")
        return PlainTextResponse(text)

    @app.delete("/api/session/{sid}", status_code=204)
    def delete(sid: str):
        get_session(sid)
        with registry_lock:
            sessions.pop(sid, None)
        return Response(status_code=204)

    return app
