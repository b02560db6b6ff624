import io
import json
import logging
import subprocess
import sys

import pytest

from cm_atlas.cache import HCPCache, default_cache_path, format_record, parse_record
from cm_atlas.cli import run_command
from cm_atlas.modular import hilbert_class_polynomial
from cm_atlas.report import Report, RunConfig, UsageError, emit_report


def run(*argv):
    buf = io.BytesIO()
    code, report = run_command(list(argv), buf)
    return code, buf.getvalue().decode(), report


def test_hcp_command(tmp_path):
    code, out, _ = run("hcp", "--disc", "-4", "--cache", str(tmp_path / "c.txt"))
    assert code == 0 and out.strip() == "x - 1728"


@pytest.mark.parametrize("disc", ["-5", "5", "0", "-1", "abc", "-2"])
def test_bad_discriminant_is_usage_error(disc, capsys):
    code, out, _ = run("forms", "--disc", disc)
    assert code == 2 and out == ""


def test_missing_argument_is_usage_error():
    assert run("forms")[0] == 2
    assert run("points")[0] == 2
    assert run("points", "--rational", "--quadratic")[0] == 2
    assert run("nonsense")[0] == 2


def test_csv_for_non_tabular_is_usage_error():
    code, out, _ = run("classgroup", "--disc", "-96", "--format", "csv")
    assert code == 2 and out == ""


def test_subfields_on_non_two_torsion_is_usage_error():
    assert run("subfields", "--disc", "-23")[0] == 2


def test_bad_config_values():
    assert run("table2", "--guard-bits", "4")[0] == 2
    assert run("table2", "--workers", "0")[0] == 2
    assert run("table2", "--scan-bound", "0")[0] == 2


def test_forms_output():
    code, out, report = run("forms", "--disc", "-20", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["a,b,c", "1,0,5", "2,2,3"]
    code, out, _ = run("forms", "--disc", "-20")
    assert out.splitlines()[-1] == "# h(-20) = 2"


def test_classgroup_output():
    code, out, _ = run("classgroup", "--disc", "-96", "--format", "json")
    data = json.loads(out)
    assert data["outputs"]["elementary_divisors"] == [2, 2]
    assert data["outputs"]["two_torsion"] is True


def test_subfields_output():
    code, out, _ = run("subfields", "--disc", "-480", "--format", "json")
    assert json.loads(out)["outputs"]["quadratic_subfields"] == [2, 3, 5, 6, 10, 15, 30]


@pytest.mark.parametrize("argv", [("table2",), ("hcp", "--disc", "-15"), ("scan-collinear",), ("points", "--rational")])
def test_json_is_deterministic_and_round_trips(argv):
    _, a, r1 = run(*argv, "--format", "json")
    _, b, _ = run(*argv, "--format", "json")
    assert a == b
    back = Report.from_json(a)
    assert json.dumps(back.to_dict(), sort_keys=True, indent=2) + "\n" == a
    assert back.command == r1.command


def test_json_config_block():
    _, out, _ = run("hcp", "--disc", "-15", "--format", "json", "--guard-bits", "80")
    cfg = json.loads(out)["config"]
    assert cfg == {"precision_guard_bits": 80, "scan_bound": 10000, "stretch_bound": 100000}


def test_timing_only_on_request():
    _, out, _ = run("hcp", "--disc", "-15", "--format", "json")
    assert "timing" not in json.loads(out)
    _, out, _ = run("hcp", "--disc", "-15", "--format", "json", "--timing")
    assert isinstance(json.loads(out)["timing"], float)


def test_verify_theorem_json():
    code, out, _ = run("verify-theorem", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["passed"] is True
    for key in ("legA", "legB", "exceptions"):
        assert key in data["outputs"]


def test_table1_bound():
    code, out, _ = run("table1", "--bound", "100", "--format", "json")
    discs = json.loads(out)["outputs"]["discriminants"]
    assert discs[:4] == [-3, -4, -7, -8] and all(d >= -100 for d in discs)


def test_report_equality_ignores_timing():
    a = Report("x", {}, {"v": 1}, timing=1.0)
    b = Report("x", {}, {"v": 1}, timing=2.0)
    assert a == b
    with pytest.raises(UsageError):
        emit_report(a, "csv")
    with pytest.raises(UsageError):
        emit_report(a, "yaml")
    assert emit_report(a, "text", include_timing=True).endswith(b"# 1.00s\n")


def test_run_config_validates():
    with pytest.raises(UsageError):
        RunConfig(output_format="xml")
    assert RunConfig().cache_path == default_cache_path()


# ---------------------------------------------------------------- cache


def test_cache_records():
    assert format_record(hilbert_class_polynomial(-4)) == "-4;-1728,1"
    assert format_record(hilbert_class_polynomial(-15)) == "-15;-121287375,191025,1"
    H = parse_record("-15;-121287375,191025,1")
    assert H.coefficients == hilbert_class_polynomial(-15).coefficients
    for bad in ("-15;1,2", "-15;-121287375,191025,2", "-4;x,1", "junk"):
        with pytest.raises((ValueError, IndexError)):
            parse_record(bad)


def test_cache_round_trip(tmp_path):
    path = tmp_path / "sub" / "h.txt"
    c = HCPCache(path)
    for d in (-15, -4, -23, -3):
        c(d)
    assert c.misses == 4 and c.hits == 0
    assert path.read_text().splitlines() == [
        "-3;0,1",
        "-4;-1728,1",
        "-15;-121287375,191025,1",
        "-23;12771880859375,-5151296875,3491750,1",
    ]
    c2 = HCPCache(path)
    assert c2(-23).coefficients == hilbert_class_polynomial(-23).coefficients
    assert c2.hits == 1 and c2.misses == 0


def test_cache_skips_corrupt_lines(tmp_path, caplog):
    path = tmp_path / "h.txt"
    path.write_text("-4;-1728,1\n-15;oops\n-7;3375,2\n\n-3;0,1\n")
    with caplog.at_level(logging.WARNING, logger="cm_atlas"):
        c = HCPCache(path)
    assert -4 in c and -3 in c and -15 not in c and -7 not in c
    assert sum("corrupt" in r.message for r in caplog.records) == 2
    assert c(-7).coefficients == (3375, 1)


def test_cache_prefetch_parallel(tmp_path):
    c = HCPCache(tmp_path / "h.txt")
    c.prefetch([-15, -20, -24, -15], workers=2)
    assert c.misses == 3
    assert len((tmp_path / "h.txt").read_text().splitlines()) == 3


def test_cache_env_var(tmp_path, monkeypatch):
    path = tmp_path / "env.txt"
    monkeypatch.setenv("CM_ATLAS_CACHE", str(path))
    assert default_cache_path() == path
    run("hcp", "--disc", "-15")
    assert path.read_text() == "-15;-121287375,191025,1\n"


def test_output_identical_with_and_without_cache(tmp_path):
    cache = str(tmp_path / "h.txt")
    for argv in (("table2",), ("points", "--quadratic"), ("hcp", "--disc", "-7392")):
        cold = run(*argv, "--format", "json", "--cache", cache)[1]
        warm = run(*argv, "--format", "json", "--cache", cache)[1]
        none = run(*argv, "--format", "json", "--no-cache")[1]
        assert cold == warm == none


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cm_atlas", "hcp", "--disc", "-3", "--cache", str(tmp_path / "h.txt")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "x\n"
