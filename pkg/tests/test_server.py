import numpy as np
import pytest
from fastapi.testclient import TestClient

from xaskit.server import create_app

from conftest import synthetic_exafs
from test_pipeline import spectrum_text


@pytest.fixture
def client():
    return TestClient(create_app())


@pytest.fixture
def session(client):
    spectrum, _ = synthetic_exafs()
    resp = client.post("/api/session", content=spectrum_text(spectrum))
    assert resp.status_code == 201
    return resp.json()


def test_create_session_columnar(session):
    assert session["report"]["source"] == "columnar"
    assert len(session["energy"]) == len(session["mu"])
    assert 8990 < session["e0"] < 9010


def test_create_session_xdi(client):
    from xaskit.ingest import write_xdi
    spectrum, _ = synthetic_exafs()
    resp = client.post("/api/session", content=write_xdi(spectrum))
    assert resp.status_code == 201
    assert resp.json()["report"]["source"] == "xdi"


def test_create_session_bad_input(client):
    resp = client.post("/api/session", content="no numbers here")
    assert resp.status_code == 400
    assert "error" in resp.json()


def test_unknown_session_404(client):
    assert client.get("/api/session/deadbeef").status_code == 404


def test_snapshot_contains_full_state(client, session):
    sid = session["id"]
    snap = client.get(f"/api/session/{sid}").json()
    assert snap["config"]["engine"] == "spline"
    bg = snap["background"]
    assert {"e0", "edge_step", "norm", "k", "chi_k3", "bqs", "knots"} <= set(bg)
    ft = snap["ft"]
    assert len(ft["r"]) == len(ft["magnitude"])


def test_e0_method_switch(client, session):
    sid = session["id"]
    resp = client.post(f"/api/session/{sid}/e0",
                       json={"method": "half_height"})
    assert resp.status_code == 200
    assert "e0_by_method" in resp.json()
    assert client.post(f"/api/session/{sid}/e0",
                       json={"method": "psychic"}).status_code == 400


def test_background_engine_switch_and_knots(client, session):
    sid = session["id"]
    resp = client.post(f"/api/session/{sid}/background",
                       json={"engine": "poly"})
    assert resp.status_code == 200
    assert "knots" not in resp.json()

    resp = client.post(f"/api/session/{sid}/background",
                       json={"engine": "spline"})
    knots = resp.json()["knots"]
    moved = list(knots["y"])
    moved[2] *= 1.05
    resp = client.post(f"/api/session/{sid}/background",
                       json={"knot_y": moved})
    assert resp.status_code == 200
    assert resp.json()["knots"]["y"] == pytest.approx(moved)


def test_knot_drag_matches_library(client, session):
    from xaskit.pipeline import PipelineConfig, run_pipeline
    from xaskit import EnergyGrid, Spectrum
    sid = session["id"]
    snap = client.get(f"/api/session/{sid}").json()
    knots = snap["background"]["knots"]
    moved = np.asarray(knots["y"]) * 1.02
    resp = client.post(f"/api/session/{sid}/background",
                       json={"knot_y": moved.tolist()})
    spectrum = Spectrum(grid=EnergyGrid(np.asarray(session["energy"])),
                        mu=np.asarray(session["mu"]))
    direct = run_pipeline(spectrum, PipelineConfig(), knot_y=moved)
    assert resp.json()["bqs"]["score"] == direct.bqs_score


def test_refine_never_worsens_bqs(client, session):
    sid = session["id"]
    before = client.get(f"/api/session/{sid}").json()["background"]["bqs"]["score"]
    resp = client.post(f"/api/session/{sid}/refine")
    assert resp.status_code == 200
    assert resp.json()["bqs"]["score"] <= before + 1e-12


def test_refine_rejected_for_poly(client, session):
    sid = session["id"]
    client.post(f"/api/session/{sid}/background", json={"engine": "poly"})
    assert client.post(f"/api/session/{sid}/refine").status_code == 400


def test_ft_params_update(client, session):
    sid = session["id"]
    resp = client.post(f"/api/session/{sid}/ft",
                       json={"weight": 2,
                             "window": {"kind": "kaiser", "alpha": 4.0,
                                        "k_min": 2.0, "k_max": 11.0}})
    assert resp.status_code == 200
    body = resp.json()
    assert body["weight"] == 2
    assert max(body["k"]) <= 12.5


def test_concurrent_mutation_rejected(client, session):
    sid = session["id"]
    state = client.app.state.sessions[sid]
    assert state.lock.acquire(blocking=False)
    try:
        resp = client.post(f"/api/session/{sid}/e0",
                           json={"method": "half_height"})
        assert resp.status_code == 409
    finally:
        state.lock.release()
    # once released, the same mutation goes through
    assert client.post(f"/api/session/{sid}/e0",
                       json={"method": "half_height"}).status_code == 200


def test_export_formats(client, session):
    sid = session["id"]
    expectations = {"xdi": "# XDI/", "columnar": "# e0 =",
                    "chi": "k", "rspace": "r"}
    for fmt, first_label in expectations.items():
        resp = client.get(f"/api/session/{sid}/export", params={"format": fmt})
        assert resp.status_code == 200
        if fmt in ("xdi", "columnar"):
            assert resp.text.startswith(first_label)
        else:
            assert resp.text.splitlines()[0].split()[1] == first_label
    resp = client.get(f"/api/session/{sid}/export", params={"format": "nope"})
    assert resp.status_code == 400


def test_export_original_is_byte_exact(client):
    spectrum, _ = synthetic_exafs()
    text = spectrum_text(spectrum)
    sid = client.post("/api/session", content=text).json()["id"]
    resp = client.get(f"/api/session/{sid}/export", params={"format": "original"})
    assert resp.text == text


def test_delete_session(client, session):
    sid = session["id"]
    assert client.delete(f"/api/session/{sid}").status_code == 204
    assert client.get(f"/api/session/{sid}").status_code == 404


def test_column_override(client):
    spectrum, _ = synthetic_exafs()
    lines = ["# energy  i0  it  sdd"]
    for e, mu in zip(spectrum.energies, spectrum.mu):
        lines.append(f"{e:.10g}  1000.0  {1000.0 * np.exp(-mu):.10g}"
                     f"  {500.0 * mu:.10g}")
    text = "\n".join(lines) + "\n"
    created = client.post("/api/session", content=text).json()
    sid = created["id"]
    # switch from the default transmission pair to the detector channel
    resp = client.post(f"/api/session/{sid}/columns",
                       json={"energy": 0, "i0": 1, "i_fluor": [3],
                             "mode": "fluorescence"})
    assert resp.status_code == 200
    assert resp.json()["mu"] != created["mu"]
    snap = client.get(f"/api/session/{sid}").json()
    assert snap["report"]["roles"] == {"override": "user"}
