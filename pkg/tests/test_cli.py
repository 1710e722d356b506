import json

import pytest

from thermocap.cli import CONVENTION, dump_channel, fmt, load_channel, run
from thermocap.prob_core import ClassicalChannel


@pytest.fixture
def bsc(tmp_path):
    path = tmp_path / "bsc.json"
    dump_channel(ClassicalChannel.bsc(0.1), str(path))
    return str(path)


@pytest.fixture
def ident(tmp_path):
    path = tmp_path / "id2.json"
    dump_channel(ClassicalChannel.identity(2), str(path))
    return str(path)


def out_of(capsys, argv, code=0):
    assert run(argv) == code
    return capsys.readouterr().out


def test_capacity(capsys, bsc):
    assert "capacity_bits = 1\n" in out_of(capsys, ["capacity", "--channel", bsc, "--eps", "0.1", "--m-max", "2"])


def test_entropy_d0(capsys):
    out = out_of(capsys, ["entropy", "d0", "--q", "0.5,0.3,0.2", "--r", "uniform", "--delta", "0.25"])
    assert "0.584962500721" in out and out.startswith("quantity,delta,value[bits]")


def test_entropy_from_file(capsys, tmp_path):
    f = tmp_path / "q.txt"
    f.write_text("[0.5, 0.5]")
    assert "rel,0\n" in out_of(capsys, ["entropy", "rel", "--q", str(f), "--r", "uniform"])


def test_convention_is_validated(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "x", "in_dim": 2, "out_dim": 2, "convention": "rows are inputs",
                                "matrix": [[1, 0], [0, 1]]}))
    with pytest.raises(ValueError, match="convention"):
        load_channel(str(path))
    assert run(["capacity", "--channel", str(path), "--eps", "0.1", "--m-max", "2"]) == 2


def test_shape_is_validated(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "x", "in_dim": 3, "out_dim": 2, "convention": CONVENTION,
                                "matrix": [[1, 0], [0, 1]]}))
    with pytest.raises(ValueError, match="shape"):
        load_channel(str(path))


def test_roundtrip_keeps_orientation(tmp_path):
    ch = ClassicalChannel([[0.9, 0.2, 0.5], [0.1, 0.8, 0.5]])
    dump_channel(ch, str(tmp_path / "c.json"))
    assert (load_channel(str(tmp_path / "c.json")).matrix == ch.matrix).all()


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["bounds", "--channel", "x.json", "--eps", "0.25", "--omega", "0.3", "--delta", "0.05", "--m-max", "2"],
    ["work", "bounds", "--state", "1,0", "--eps", "0.3"],
    ["work", "bounds", "--state", "1,0", "--eps", "0.1", "--work-unit", "joules", "--temperature", "300"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2


def test_bounds_report(capsys, ident):
    out = out_of(capsys, ["bounds", "--channel", ident, "--eps", "0.25", "--omega", "0.15", "--delta", "0.05",
                          "--m-max", "2", "--work-unit", "kT"])
    assert "penalty[kT] = 4.76768911549" in out and "holds = true" in out


def test_work_commands(capsys):
    out = out_of(capsys, ["work", "bounds", "--state", "1,0", "--eps", "0.1"])
    assert out.splitlines() == ["eps,lower[bits],upper[bits]", "0.1,1,1.15200309345"]
    out = out_of(capsys, ["work", "corr", "--joint", "[[0.5,0],[0,0.5]]", "--eps", "0.1"])
    assert out.splitlines()[1].startswith("0.1,1,")
    out = out_of(capsys, ["work", "simulate", "--state", "1,0", "--eps", "0.1", "--n-samples", "2000",
                          "--k-steps", "20", "--seed", "4"])
    assert out.splitlines()[0].startswith("eps,delta[bits],estimate[bits]")


def test_joules(capsys):
    out = out_of(capsys, ["work", "bounds", "--state", "1,0", "--eps", "0.1", "--work-unit", "joules",
                          "--temperature", "300", "--boltzmann-constant", "1.380649e-23"])
    lower = float(out.splitlines()[1].split(",")[1])
    assert lower == pytest.approx(300 * 1.380649e-23 * 0.6931471805599453)


def test_witness(capsys, ident):
    out = out_of(capsys, ["witness", "compile", "--channel", ident, "--free-constant"])
    assert "free_max = 0.5" in out and "gap[bits] = 0.499999" in out
    out = out_of(capsys, ["witness", "detect", "--channel", ident, "--free", ident])
    assert out == "resource = absent\n"


def test_sweep_parallel_matches_serial(capsys, bsc):
    argv = ["sweep", "capacity", "--channel", bsc, "--eps-grid", "0.05,0.1,0.2", "--m-max", "2"]
    serial = out_of(capsys, argv)
    assert out_of(capsys, argv + ["--jobs", "2"]) == serial
    assert serial.splitlines()[0] == "eps,capacity[bits]"


def test_out_file(tmp_path, bsc, capsys):
    target = tmp_path / "table.csv"
    assert run(["sweep", "asymptotic", "--channel", bsc, "--eps", "0.1", "--k-max", "2", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert target.read_text().startswith("k,rate[bits],holevo[bits]")


def test_verify_quick_deterministic(capsys):
    first = out_of(capsys, ["verify", "--suite", "quick", "--seed", "11"])
    assert out_of(capsys, ["verify", "--suite", "quick", "--seed", "11"]) == first
    assert "FAIL" not in first


def test_fmt():
    assert fmt(1.0) == "1" and fmt(float("-inf")) == "-inf" and fmt(3) == "3"
    assert fmt(2 / 3) == "0.666666666667"
