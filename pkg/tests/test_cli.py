import json
import subprocess
import sys

import numpy as np
import pytest

from shockfit.cli import main

IB = ["fixture:ibovespa_1987_coarse", "--start", "4", "--horizon", "12"]
PARAMS = '{"A":0.95,"B":1.0,"alpha":0.5,"C":0.1,"beta":0.1,"w":1.5,"phi":1.0}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def prices_csv(tmp_path, name="m.csv", start="1987-10-01", n=60, seed=0):
    import datetime as dt
    rng = np.random.default_rng(seed)
    p = 100 * np.exp(np.cumsum(rng.normal(0, 0.02, n)))
    d0 = dt.date.fromisoformat(start)
    rows = [f"{d0 + dt.timedelta(days=i)},{float(x)!r}" for i, x in enumerate(p)]
    f = tmp_path / name
    f.write_text("date,close\n" + "\n".join(rows) + "\n")
    return f


def test_fit_json(capsys):
    code, out, _ = run(capsys, "fit", *IB)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) >= {"params", "sse", "provenance", "variant"}
    assert doc["provenance"]["config"]["fit_horizon"] == 12


def test_fit_csv_with_window(capsys, tmp_path):
    f = prices_csv(tmp_path)
    code, out, _ = run(capsys, "fit", str(f), "--window", "1987", "--w-grid", "0.5:2.5:0.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["provenance"]["window"] == ["1987-10-13", "1987-11-08"]
    assert doc["provenance"]["config"]["w_grid"] == [0.5, 1.0, 1.5, 2.0, 2.5]


def test_fit_and_scan_deterministic(capsys):
    a = run(capsys, "scan-w", *IB)[1]
    b = run(capsys, "scan-w", *IB)[1]
    assert a == b and len(json.loads(a)["basins"]) >= 2


def test_out_file_and_no_partial_write(capsys, tmp_path):
    target = tmp_path / "fit.json"
    assert run(capsys, "fit", *IB, "--out", str(target))[0] == 0
    assert json.loads(target.read_text())["n_points"] == 12
    bad = tmp_path / "bad.json"
    code, _, err = run(capsys, "fit", str(tmp_path / "missing.csv"), "--out", str(bad))
    assert code == 2 and not bad.exists() and "input error" in err
    assert [p.name for p in tmp_path.iterdir()] == ["fit.json"]


def test_usage_errors(capsys):
    assert run(capsys, "fit")[0] == 4
    assert run(capsys, "nonsense")[0] == 4
    assert run(capsys, "fit", *IB, "--w-grid", "2:1:0.1")[0] == 4
    assert run(capsys, "fit", *IB, "--variant", "triple")[0] == 4


def test_input_errors(capsys, tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("date,close\n2020-01-02,1\n2020-01-01,2\n")
    code, _, err = run(capsys, "returns", str(f))
    assert code == 2 and "out of order" in err
    assert run(capsys, "fit", "fixture:nope")[0] == 2
    assert run(capsys, "fit", *IB[:1], "--horizon", "40")[0] == 2
    assert run(capsys, "synth", "--params", "{bad", "--n", "3")[0] == 2


def test_ode_check_and_resonance(capsys):
    code, out, _ = run(capsys, "ode-check", "--coeffs", '{"m":1,"gamma":0.3,"k":1.2,"Pstar":1,"delta":0.4,"shock_alpha":0.7}')
    assert code == 0 and json.loads(out)["max_abs_diff"] < 1e-6
    code, _, err = run(capsys, "ode-check", "--coeffs", '{"m":1,"gamma":2,"k":1,"Pstar":1,"delta":1,"shock_alpha":1}')
    assert code == 3 and "resonat" in err
    code, out, _ = run(capsys, "ode-check", "--coeffs",
                       '{"lam":0.5,"alpha0":7,"alpha1":1,"alpha2":0.1,"alpha3":1.5,"beta0":1,"beta1":2,"beta2":0.3,"beta3":0.5}')
    assert code == 0 and json.loads(out)["regime"] == "underdamped"


def test_synth_and_curve_tsv(capsys):
    code, out, _ = run(capsys, "synth", "--params", PARAMS, "--n", "5", "--sigma", "0.01", "--seed", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t\tvalue" and len(lines) == 6
    assert out == run(capsys, "synth", "--params", PARAMS, "--n", "5", "--sigma", "0.01", "--seed", "3")[1]
    code, out, _ = run(capsys, "curve", "--params", PARAMS, "--from", "1", "--to", "2", "--step", "0.5")
    assert code == 0 and len(out.splitlines()) == 4


def test_returns_and_logdensity(capsys, tmp_path):
    f = prices_csv(tmp_path)
    code, out, _ = run(capsys, "returns", str(f))
    assert code == 0 and len(out.splitlines()) == 60
    code, out, _ = run(capsys, "logdensity", "fixture:sp500_logdensity_bins", "--bin", "0.004")
    assert code == 0 and out.splitlines()[1].startswith("-0.232\t")


def test_profile(capsys):
    code, out, _ = run(capsys, "profile", *IB, "--param", "w", "--params", PARAMS, "--range", "0.5:3.5", "--steps", "4")
    assert code == 0 and out.splitlines()[0] == "w\tsse" and len(out.splitlines()) == 5


def test_corr(capsys, tmp_path):
    files = [str(prices_csv(tmp_path, f"m{i}.csv", seed=i)) for i in range(3)]
    code, out, _ = run(capsys, "corr", *files, "--window", "1987")
    doc = json.loads(out)
    assert code == 0 and len(doc["matrix"]) == 3 and 1 <= doc["lambda_max"] <= 3
    assert doc["n_obs"] == 26


def test_mapback(capsys, tmp_path):
    fit = tmp_path / "fit.json"
    fit.write_text(json.dumps({"params": json.loads(PARAMS), "provenance": {"label": "Nasdaq"}}))
    caps = tmp_path / "caps.txt"
    caps.write_text("NYSE 13046\nNasdaq 2904\n")
    code, out, _ = run(capsys, "mapback", str(fit), "--mass", f"cap:{caps}")
    doc = json.loads(out)
    assert code == 0 and doc["coefficients"]["m"] == pytest.approx(2904 / 13046)
    a, b = prices_csv(tmp_path, "a.csv", seed=1), prices_csv(tmp_path, "b.csv", seed=2)
    code, out, _ = run(capsys, "mapback", str(fit), "--mass", "invvol", "--market-csv", str(a), "--reference-csv", str(b))
    assert code == 0 and json.loads(out)["mass"]["method"] == "invvol"
    assert run(capsys, "mapback", str(fit), "--mass", "invvol")[0] == 4
    assert run(capsys, "mapback", str(fit), "--mass", f"cap:{caps}", "--market", "LSE")[0] == 2
    code, _, err = run(capsys, "mapback", str(fit), "--mass", "value:1", "--p0", "1.2")
    assert code == 0
    half_pi = dict(json.loads(PARAMS), phi=1.5707963267948966)
    fit.write_text(json.dumps(half_pi))
    assert run(capsys, "mapback", str(fit), "--mass", "value:1", "--p0", "1.2")[0] == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "shockfit", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
