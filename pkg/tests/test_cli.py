import json

import numpy as np
import pytest

from pmisample import (load_multifield, load_pointset, make_synthetic, feature_spec,
                       parse_query, query_raw, reconstruct)
from pmisample.cli import main
from pmisample.fieldio import load_field
from pmisample.sampler import sample


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--n", "24", "--seed", "7", "--out", str(d / "d.json")]) == 0
    return d


def test_synth_matches_library(data):
    assert load_multifield(data / "d.json") == make_synthetic(feature_spec(24), 7)


@pytest.mark.parametrize("method", ["random", "pmi"])
def test_sample_matches_library(data, method):
    out = data / f"{method}.mvsp"
    rc = main(["sample", str(data / "d.json"), str(out), "--method", method,
               "--alpha", "0.05", "--seed", "3", "--bins", "32"])
    assert rc == 0
    mf = load_multifield(data / "d.json")
    assert load_pointset(out) == sample(mf, method, 0.05, 3, bins=32)


def test_query_outputs(data, capsys):
    main(["sample", str(data / "d.json"), str(data / "p.mvsp"), "--alpha", "0.1", "--seed", "1",
          "--bins", "32"])
    q = "1.1 <= v0 <= 1.4 AND 1.1 <= v1 <= 1.4"
    rc = main(["query", "--query", q, "--input", str(data / "d.json"),
               "--out", str(data / "q.bin")])
    assert rc == 0
    truth = query_raw(load_multifield(data / "d.json"), parse_query(q))
    np.testing.assert_array_equal(np.fromfile(data / "q.bin", dtype="<u8"), truth.indices)
    capsys.readouterr()
    rc = main(["query", "--query", q, "--input", str(data / "p.mvsp"),
               "--ground-truth", str(data / "d.json"), "--out", str(data / "q.csv")])
    out = capsys.readouterr().out
    assert rc == 0 and "jaccard:" in out and f"query: {parse_query(q)}" in out
    assert (data / "q.csv").read_text().startswith("index\n")


def test_reconstruct_and_eval(data, capsys):
    main(["sample", str(data / "d.json"), str(data / "r.mvsp"), "--alpha", "0.1", "--seed", "2",
          "--bins", "32"])
    for v in ("v0", "v1"):
        assert main(["reconstruct", "--input", str(data / "r.mvsp"), "--var", v,
                     "--out", str(data / f"r_{v}.raw")]) == 0
    ps = load_pointset(data / "r.mvsp")
    mf = load_multifield(data / "d.json")
    got = load_field(data / "r_v0.raw", mf.dims, "v0")
    want = reconstruct(ps, "v0").values.astype(np.float32)
    np.testing.assert_array_equal(got.values, want)
    assert json.loads((data / "r_v0.json").read_text())["variables"][0]["name"] == "v0"

    rc = main(["eval", "--raw", str(data / "d.json"), "--recon", f"v0={data / 'r_v0.raw'}",
               "--recon", f"v1={data / 'r_v1.raw'}", "--slice", "z:12", "--roi", "6:17,6:17,6:17",
               "--png-dir", str(data / "png"), "--report", str(data / "m.json")])
    assert rc == 0
    rep = json.loads((data / "m.json").read_text())
    assert 0 < rep["variables"]["v0"]["ssim"] <= 1
    assert set(rep["pairs"]["v0,v1"]) == {"pearson", "pearson_raw", "dcor", "dcor_raw"}
    assert (data / "png" / "raw_v0_z12.png").exists()


def test_full_sample_eval_is_perfect(data):
    mf = load_multifield(data / "d.json")
    from pmisample.fieldio import SampledPointSet, save_pointset
    save_pointset(SampledPointSet.from_multifield(mf, np.arange(mf.dims.n)), data / "all.mvsp")
    main(["reconstruct", "--input", str(data / "all.mvsp"), "--var", "v0",
          "--out", str(data / "all_v0.raw")])
    main(["eval", "--raw", str(data / "d.json"), "--recon", f"v0={data / 'all_v0.raw'}",
          "--metrics", "ssim,mse", "--slice", "z:3", "--report", str(data / "all.json")])
    rep = json.loads((data / "all.json").read_text())["variables"]["v0"]
    assert rep["ssim"] == pytest.approx(1.0, abs=1e-12) and rep["mse_full"] == 0.0


def test_pmi_plot_and_field(data):
    rc = main(["pmi-plot", str(data / "d.json"), "--bins", "8", "--csv", str(data / "t.csv"),
               "--png", str(data / "t.png"), "--hist-csv", str(data / "h.csv")])
    assert rc == 0
    rows = np.loadtxt(data / "t.csv", delimiter=",", skiprows=1)
    assert rows.shape == (64, 4)
    assert rows[:, 3].max() == 1.0 or np.all(rows[:, 3] == 0)
    from PIL import Image
    assert Image.open(data / "t.png").size == (8, 8)
    assert main(["pmi-field", str(data / "d.json"), "--bins", "8",
                 "--out", str(data / "pmi.raw")]) == 0
    pf = load_field(data / "pmi.raw", load_multifield(data / "d.json").dims, "pmi")
    assert 0.0 <= pf.values.min() and pf.values.max() <= 1.0


def test_exit_codes(data, tmp_path):
    assert main(["query", "--query", "v0 == 1", "--input", str(data / "d.json")]) == 1
    assert main(["sample", str(data / "d.json"), str(tmp_path / "x"), "--alpha", "1.5",
                 "--seed", "0"]) == 1
    assert main(["query", "--query", "v0 > 1", "--input", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "bad.mvsp").write_bytes(b"XXXX" + bytes(40))
    assert main(["reconstruct", "--input", str(tmp_path / "bad.mvsp"), "--var", "v0",
                 "--out", str(tmp_path / "o.raw")]) == 1
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"schema_version": 1, "seeds": []}))
    assert main(["bench", "--config", str(bad), "--out", str(tmp_path / "r.json")]) == 1


def test_bench_is_deterministic_over_threads(tmp_path):
    cfg = {"schema_version": 1, "dataset": {"synthetic": "feature", "n": 16, "seed": 1},
           "variables": ["v0", "v1"], "alphas": [0.05, 0.1], "seeds": [0, 1, 2], "bins": 16,
           "queries": ["v0 > 0.5"], "reconstruction": {"slice": "z:8", "roi": "feature"}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for t in ("1", "4"):
        out = tmp_path / f"r{t}.json"
        assert main(["--threads", t, "bench", "--config", str(path), "--out", str(out),
                     "--quiet"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
