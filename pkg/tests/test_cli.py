import csv
import io

import pytest

from raidrel import closed_forms as cf
from raidrel.cli import expand, main
from raidrel.config import ConfigError, RaidConfig
from raidrel.models import model_pdl


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_expand():
    assert expand("n", "1..4,8", False) == [1, 2, 3, 4, 8]
    assert expand("mu", "1/6h", False) == [1460.0]
    with pytest.raises(ConfigError):
        expand("n", "5..2", False)


def test_pdl_sweep_count(capsys):
    code, out, _ = run(capsys, "pdl", "--model", "no-repair", "--n", "1..64", "--m", "1..5",
                       "--lambda", "1/10y", "--t", "5y")
    assert code == 0
    table = rows(out)
    assert len(table) == 320
    assert list(table[0]) == ["model", "N", "M", "lambda_per_yr", "mu_per_yr", "p",
                              "lambda_s_per_yr", "mu_s_per_yr", "t_yr", "pdl"]
    first = table[0]
    assert (first["N"], first["M"]) == ("1", "1")
    assert float(first["pdl"]) == pytest.approx(cf.no_repair_pdl(1, 1, 0.1, 5.0), rel=1e-8)


def test_pdl_single_row(capsys):
    code, out, _ = run(capsys, "pdl", "--model", "individual", "--n", "4", "--m", "1",
                       "--mu", "1/6h", "--t", "5y")
    table = rows(out)
    assert code == 0 and len(table) == 1
    ref = model_pdl("individual", RaidConfig(4, 1))
    assert abs(float(table[0]["pdl"]) - ref) < 1e-10


def test_float_format(capsys):
    _, out, _ = run(capsys, "pdl", "--model", "no-repair", "--n", "4", "--m", "2")
    line = out.splitlines()[1]
    assert line.split(",")[3] == "1.00000000e-01"


def test_sector_imperfect_accepts_p(capsys):
    code, out, _ = run(capsys, "pdl", "--model", "sector-imperfect", "--n", "4", "--m", "1",
                       "--p", "0.05")
    assert code == 0
    assert float(rows(out)[0]["p"]) == 0.05


def test_mttdl(capsys):
    code, out, _ = run(capsys, "mttdl", "--model", "no-repair", "--n", "4", "--m", "2",
                       "--lambda", "1/10y")
    assert code == 0
    for r in rows(out):
        assert float(r["mttdl_yr"]) == pytest.approx(6.1666667, abs=1e-6)
    _, out, _ = run(capsys, "mttdl", "--model", "raid5", "--n", "4", "--m", "1")
    vals = {r["method"]: float(r["mttdl_yr"]) for r in rows(out)}
    assert vals["closed-form"] == pytest.approx(vals["resolvent"], rel=1e-6)


def test_mttdl_raw_units(capsys):
    code, out, _ = run(capsys, "mttdl", "--model", "delay-rebuild", "--n", "1", "--m", "1",
                       "--lambda", "0.01", "--mu", "0.01", "--h", "300", "--raw-units")
    assert code == 0
    assert float(rows(out)[0]["mttdl_yr"]) == pytest.approx(125.093, abs=1e-3)


def test_simulate_reproducible(capsys):
    args = ("simulate", "--model", "no-repair", "--n", "1", "--m", "0", "--trials", "100000",
            "--seed", "7")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    r = rows(first)[0]
    exact = cf.no_repair_pdl(1, 0, 0.1, 5.0)
    assert abs(float(r["pdl_estimate"]) - exact) <= 3 * float(r["stderr"])
    assert r["trials"] == "100000" and r["seed"] == "7"


@pytest.mark.parametrize("argv", [
    ("simulate", "--model", "no-repair", "--n", "1", "--m", "0", "--trials", "0"),
    ("pdl", "--n", "4"),
    ("pdl", "--n", "4", "--m", "1", "--mu", "fast"),
    ("pdl", "--n", "4", "--m", "1", "--p", "1.5"),
    ("pdl", "--model", "raid5", "--n", "4", "--m", "2"),
    ("pdl", "--model", "nope", "--n", "4", "--m", "1"),
    ("pdl", "--config", "/nonexistent/raid.conf", "--n", "4", "--m", "1"),
])
def test_usage_errors(capsys, argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:     # argparse rejects bad choices itself
        code = exc.code
    assert code == 2
    assert capsys.readouterr().err


def test_numerical_failure_exit(capsys):
    # no transitions at all: the resolvent is singular
    code, _, err = run(capsys, "mttdl", "--model", "no-repair", "--n", "2", "--m", "1",
                       "--lambda", "0")
    assert code == 3
    assert "numerical failure" in err


def test_config_file_and_override(tmp_path, capsys):
    f = tmp_path / "raid.conf"
    f.write_text("n = 4\nm = 2\nlambda = 1/10y\nmu = 1/6h\n")
    _, out, _ = run(capsys, "pdl", "--config", str(f), "--model", "individual", "--m", "3")
    r = rows(out)[0]
    assert (r["N"], r["M"]) == ("4", "3")
    assert float(r["mu_per_yr"]) == 1460.0


def test_out_file(tmp_path, capsys):
    target = tmp_path / "pdl.csv"
    code, out, _ = run(capsys, "pdl", "--model", "no-repair", "--n", "2", "--m", "1",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("model,N,M")


def test_jobs_keep_order(capsys):
    args = ("pdl", "--model", "individual", "--n", "1..6", "--m", "1,2")
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--jobs", "4")
    assert serial == parallel


def test_delay_trace(capsys):
    code, out, err = run(capsys, "delay-trace", "--n", "1", "--lambda", "0.01", "--mu", "0.01",
                         "--h", "300", "--t-end", "2000", "--raw-units", "--report-extrema")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["t", "q0", "q1", "q2", "in_repair"]
    q2 = [float(r["q2"]) for r in table]
    assert all(b >= a for a, b in zip(q2, q2[1:]))
    assert int(err.split(":")[1]) >= 3


def test_delay_trace_h0_matches_raid5(capsys):
    _, out, _ = run(capsys, "delay-trace", "--n", "4", "--lambda", "0.1", "--mu", "3",
                    "--h", "0", "--t-end", "5", "--dt", "0.005")
    last = rows(out)[-1]
    assert float(last["t"]) == 5.0
    ref = model_pdl("raid5", RaidConfig(4, 1, lam=0.1, mu=3.0))
    assert float(last["q2"]) == pytest.approx(ref, rel=1e-7)


def test_delay_trace_rebuild(capsys):
    code, out, _ = run(capsys, "delay-trace", "--model", "delay-rebuild", "--n", "1",
                       "--lambda", "0.01", "--mu", "0.01", "--h", "300", "--t-end", "1000",
                       "--raw-units")
    assert code == 0
    last = rows(out)[-1]
    total = sum(float(last[k]) for k in ("q0", "q1", "q2", "in_repair"))
    assert total == pytest.approx(1.0, abs=1e-8)   # nine digits per value
