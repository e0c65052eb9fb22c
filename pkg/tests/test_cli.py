import json

import pytest

from xaskit.cli import main

from conftest import synthetic_exafs
from test_pipeline import spectrum_text


@pytest.fixture
def scan_file(tmp_path):
    spectrum, _ = synthetic_exafs()
    path = tmp_path / "scan.dat"
    path.write_text(spectrum_text(spectrum))
    return path


def test_process_writes_artifacts(scan_file, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["process", str(scan_file), "--engine", "poly",
               "--out-dir", str(out)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "ok" in captured.out and "0 failed" in captured.out
    assert (out / "scan.norm.xdi").exists()
    assert (out / "scan.report.json").exists()


def test_process_is_deterministic(scan_file, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["process", str(scan_file), "--engine", "poly",
                     "--out-dir", str(out)]) == 0
        outs.append(out)
    for artifact in ("scan.norm.xdi", "scan.chi.dat", "scan.rspace.dat"):
        assert (outs[0] / artifact).read_bytes() == (outs[1] / artifact).read_bytes()


def test_process_reports_failures(tmp_path, capsys):
    bad = tmp_path / "bad.dat"
    bad.write_text("not numbers at all\n")
    rc = main(["process", str(bad), "--out-dir", str(tmp_path / "out")])
    assert rc == 1
    assert "FAIL" in capsys.readouterr().err


def test_config_file_round_trip(scan_file, tmp_path):
    from xaskit.pipeline import PipelineConfig
    cfg_path = tmp_path / "pipeline.ini"
    cfg_path.write_text(PipelineConfig(engine="poly", kw=2).to_ini())
    out = tmp_path / "out"
    assert main(["process", str(scan_file), "--config", str(cfg_path),
                 "--out-dir", str(out)]) == 0
    report = json.loads((out / "scan.report.json").read_text())
    assert report["engine"] == "poly"


def test_e0_command(scan_file, capsys):
    assert main(["e0", str(scan_file)]) == 0
    out = capsys.readouterr().out
    assert "smoothed_first_derivative" in out
    assert "half_height" in out


def test_export_norm_and_original(scan_file, tmp_path, capsys):
    assert main(["export", str(scan_file), "--engine", "poly"]) == 0
    assert capsys.readouterr().out.startswith("# XDI/")

    out_path = tmp_path / "copy.dat"
    assert main(["export", str(scan_file), "--original",
                 "-o", str(out_path)]) == 0
    assert out_path.read_bytes() == scan_file.read_bytes()


def test_export_chi_stage(scan_file, capsys):
    assert main(["export", str(scan_file), "--stage", "chi",
                 "--engine", "poly"]) == 0
    assert capsys.readouterr().out.splitlines()[0].split()[1] == "k"


def test_compare_identical_files(scan_file, tmp_path, capsys):
    out = tmp_path / "out"
    main(["process", str(scan_file), "--engine", "poly", "--out-dir", str(out)])
    a = out / "scan.chi.dat"
    rc = main(["compare", str(a), str(a), "--stage", "chi"])
    assert rc == 0
    assert "rms=0" in capsys.readouterr().out


def test_compare_detects_difference(scan_file, tmp_path):
    out = tmp_path / "out"
    main(["process", str(scan_file), "--engine", "poly", "--out-dir", str(out)])
    a = out / "scan.chi.dat"
    text = a.read_text().splitlines()
    # scale the chi column of every data row
    rows = []
    for line in text:
        if line.startswith("#"):
            rows.append(line)
            continue
        vals = [float(t) for t in line.split()]
        vals[1] *= 2.0
        rows.append("  ".join(f"{v:>18.12g}" for v in vals))
    b = tmp_path / "scaled.chi.dat"
    b.write_text("\n".join(rows) + "\n")
    assert main(["compare", str(a), str(b), "--stage", "chi",
                 "--tolerance", "1e-6"]) == 1


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_column_map_override(tmp_path):
    spectrum, _ = synthetic_exafs()
    lines = ["# ev  weird_mu"]
    for e, mu in zip(spectrum.energies, spectrum.mu):
        lines.append(f"{e:.12g}  {mu:.12g}")
    path = tmp_path / "odd.dat"
    path.write_text("\n".join(lines) + "\n")
    cmap = tmp_path / "map.json"
    cmap.write_text(json.dumps({"energy": {"exact": ["ev"]},
                                "mu": {"exact": ["weird_mu"]}}))
    out = tmp_path / "out"
    assert main(["process", str(path), "--engine", "poly",
                 "--column-map", str(cmap), "--out-dir", str(out)]) == 0
