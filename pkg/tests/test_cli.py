import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cvlab import densities as D
from cvlab.cli import main, read_curve, read_simulation


def test_theory_output_format(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["theory", "--curve", "saddle", "--steps", "8", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# curve=saddle,convention=count,chi=2"
    assert lines[1] == "x,value"
    assert len(lines) == 2 + 9
    meta, xs, vs = read_curve(out)
    np.testing.assert_allclose(vs, D.dens_saddle_limit(xs, "count"), rtol=1e-15)
    assert (tmp_path / "s.csv.manifest.json").exists()


def test_theory_scaled_convention_and_stdout(capsys):
    assert main(["theory", "--curve", "max", "--convention", "paper", "--steps", "2",
                 "--xmax", "1"]) == 0
    rows = capsys.readouterr().out.splitlines()[2:]
    x, v = map(float, rows[-1].split(","))
    assert x == 1.0 and v == pytest.approx(D.dens_max_limit(1.0, "paper"), rel=1e-15)


def test_theory_chi_zero_is_zero(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["theory", "--curve", "finf", "--chi", "0", "--steps", "5", "--out", str(out)]) == 0
    assert np.all(read_curve(out)[2] == 0.0)


@pytest.mark.parametrize("argv", [
    ["theory", "--curve", "saddle", "--steps", "0"],
    ["theory", "--curve", "nope"],
    ["theory", "--curve", "max", "--xmax", "-1"],
    ["kacrice", "--n", "1"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 2


def test_kacrice_matches_library(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["kacrice", "--n", "30", "--steps", "20", "--out", str(out)]) == 0
    meta, xs, vs = read_curve(out)
    assert meta["n"] == "30"
    np.testing.assert_allclose(vs, [D.kac_rice_finite(30, x) for x in xs], rtol=1e-15)


def test_simulate_byte_identical(tmp_path):
    args = ["simulate", "--n", "8", "--samples", "10", "--seed", "17"]
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert main(args + ["--out", str(a / "x.csv"), "--summary", str(a / "x.json")]) == 0
    assert main(args + ["--out", str(b / "x.csv"), "--summary", str(b / "x.json"),
                        "--workers", "2"]) == 0
    for name in ("x.csv", "x.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    meta, rows = read_simulation(a / "x.csv")
    assert meta["accepted"] == "10"
    saddles = sum(r[1] == "saddle" for r in rows)
    assert saddles - (len(rows) - saddles) == 10 * 6
    summary = json.loads((a / "x.json").read_text())
    assert "started" not in json.dumps(summary)
    assert "started" in (a / "x.json.manifest.json").read_text()


def test_compare_exit_codes(tmp_path):
    sim = tmp_path / "s.csv"
    lines = ["# n=20,samples=3,accepted=3,ensemble=gaussian,seed=0",
             "sample_id,index_type,x_value,chart,re,im,residual"]
    # values placed at limit-law quantiles pass the KS checks; counts match the masses
    for kind, m in (("saddle", 81), ("max", 21)):
        cdf = D.saddle_limit_cdf if kind == "saddle" else D.max_limit_cdf
        grid = np.linspace(0, 4, 40001)
        qs = np.interp((np.arange(m) + 0.5) / m, cdf(grid), grid)
        lines += [f"0,{kind},{float(q)!r},Z,0,0,0" for q in qs]
    sim.write_text("\n".join(lines) + "\n")
    report = tmp_path / "r.json"
    code = main(["compare", "--sim", str(sim), "--report", str(report)])
    rep = json.loads(report.read_text())
    assert rep["checks"]["mass_saddle"]["value"] == pytest.approx(81 / 60)
    assert code == (0 if rep["pass"] else 4)
    assert rep["pass"]
    # a sample with far too few maxima breaches the mass check
    sim.write_text("\n".join(l for l in lines if ",max," not in l) + "\n")
    assert main(["compare", "--sim", str(sim)]) == 4


def test_oracle_command(capsys):
    assert main(["oracle", "--n", "3", "--samples", "4", "--seed", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["pass"] is True
    assert main(["oracle", "--n", "9"]) == 2


def test_plot_script(tmp_path):
    c = tmp_path / "c.csv"
    main(["theory", "--curve", "total", "--steps", "4", "--out", str(c)])
    script = tmp_path / "p.gp"
    assert main(["plot", "--curves", str(c), "--out", str(script)]) == 0
    text = script.read_text()
    assert "set datafile separator ','" in text and str(c) in text


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cvlab", "theory", "--curve", "saddle",
                        "--steps", "1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[0].startswith("# curve=saddle")
