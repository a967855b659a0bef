import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from mskit import classifier as C
from mskit.cli import main
from mskit.diagrams import canonical_svg
from mskit.params import SpaceDescriptor as D


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def lib_json(obj):
    return json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n"


def test_classify_linfty():
    code, out = run("classify", "--predicate", "linfty", "--family", "B", "--flavor", "sub",
                    "--s", "3/5", "--p", "2", "--q", "1", "--rho", "-1", "--n", "3")
    assert code == 0 and json.loads(out)["status"] == "holds"
    want = C.embeds(C.EmbeddingQuery(D("B", "Sub", "3/5", 2, 1, -1, 3), C.TargetSpace.linfty()))
    assert out == lib_json(want.to_json())


def test_classify_delta_on_the_limiting_line():
    code, out = run("classify", "--predicate", "delta", "--flavor", "sub", "--family", "B",
                    "--s", "-3/4", "--p", "2", "--q", "inf", "--rho", "-1/2", "--n", "1")
    assert code == 0
    assert out == lib_json(C.member(C.Element.DELTA, D("B", "Sub", "-3/4", 2, "inf", "-1/2", 1))
                           .to_json())


@pytest.mark.parametrize("pred,call", [
    ("chi", lambda d: C.member(C.Element.CHI_Q, d)),
    ("functional", lambda d: C.functional_chiQ(d)),
    ("haar", lambda d: C.check_property(d, C.Property.HAAR_BASIS)),
    ("trace", lambda d: C.trace(d)),
    ("envelope", lambda d: C.growth_envelope(d)),
    ("l1loc", lambda d: C.embeds(C.EmbeddingQuery(d, C.TargetSpace.l1loc()))),
])
def test_classify_is_a_thin_shell(pred, call):
    code, out = run("classify", "--predicate", pred, "--flavor", "sup", "--s", "1/2",
                    "--p", "3/2", "--q", "2", "--rho", "-1/2", "--n", "2")
    assert code == 0
    assert out == lib_json(call(D("B", "Sup", "1/2", "3/2", 2, "-1/2", 2)).to_json())


def test_classify_embeds_and_compactness():
    base = ["--flavor", "sup", "--s", "3/5", "--p", "1", "--q", "2", "--rho", "-1/2", "--n", "2",
            "--flavor2", "sup", "--s2", "0", "--p2", "2", "--q2", "2", "--rho2", "-3/2",
            "--ground", "domain"]
    code, out = run("classify", "--predicate", "compactness", *base)
    assert code == 0 and json.loads(out)["alpha"] in ("7/30", 7 / 30)
    code, out = run("classify", "--predicate", "embeds", "--compact", *base)
    assert code == 0 and json.loads(out)["status"] == "holds"


def test_classify_without_q_reports_conditions():
    code, out = run("classify", "--predicate", "linfty", "--s", "1/2", "--p", "2",
                    "--rho", "-1", "--n", "3")
    obj = json.loads(out)
    assert code == 0 and obj["status"] == "holds_under" and obj["conditions"] == ["q <= 1"]


def test_classify_csv():
    code, out = run("classify", "--predicate", "chi", "--s", "0", "--p", "2", "--q", "2",
                    "--rho", "-1/2", "--n", "1", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:1] and "status" in rows[0]


@pytest.mark.parametrize("argv,fragment", [
    (["classify", "--predicate", "linfty", "--s", "1", "--p", "2", "--q", "1", "--rho", "-1"],
     "--n is required"),
    (["classify", "--predicate", "linfty", "--s", "1", "--p", "2", "--q", "1", "--rho", "-4",
      "--n", "3"], "rho >= -n"),
    (["classify", "--predicate", "linfty", "--s", "1", "--p", "0", "--q", "1", "--rho", "-1",
      "--n", "3"], "p > 0"),
    (["classify", "--predicate", "nonsense", "--n", "1"], "invalid choice"),
    (["classify", "--predicate", "lr", "--s", "1", "--p", "2", "--q", "1", "--rho", "-1",
      "--n", "2"], "--r is required"),
    ([], "choose a subcommand"),
])
def test_usage_errors_exit_2(argv, fragment, capsys):
    code, _ = run(*argv)
    assert code == 2
    assert fragment in capsys.readouterr().err


def test_norm_delta_rate():
    code, out = run("norm", "--model", "delta", "--n", "1", "--rho", "-1/2", "--p", "2",
                    "--q", "1", "--s", "-1", "--flavor", "sub", "--jmax", "14")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "level,term,cumulative" and len(rows) == 15 + 2
    summary = rows[-1]
    rate = float(summary.split("fitted_rate=")[1].split()[0])
    assert abs(rate + 0.25) < 1e-6 and "verdict=Finite" in summary


def test_norm_boundary_rate():
    code, out = run("norm", "--model", "boundary", "--n", "2", "--rho", "-3/2", "--p", "1",
                    "--q", "1", "--s", "4/5", "--flavor", "sup", "--jmax", "14", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["verdict"] == "Finite" and abs(obj["fitted_rate"] + 0.2) < 0.02


def test_norm_from_file(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"n": 1, "j_max": 1}\n{"j": 0, "m": [0], "v": 1}\n{"j": 1, "m": [0], "v": 1}\n')
    code, out = run("norm", "--file", str(path), "--s", "0", "--p", "1", "--q", "1",
                    "--flavor", "classical", "--format", "json")
    obj = json.loads(out, parse_constant=lambda c: pytest.fail(f"non-JSON constant {c}"))
    assert code == 0 and obj["value"] == 1.5 and obj["fitted_rate"] is None


def test_norm_malformed_file_reports_the_line(tmp_path, capsys):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"n": 1, "j_max": 3}\n{"j": 0, "m": [0], "v": 1}\n{"j": 1, "m": [0, 0], "v": 1}\n')
    code, _ = run("norm", "--file", str(path), "--s", "0", "--p", "1", "--q", "1",
                  "--rho", "-1/2")
    assert code == 2 and "line 3" in capsys.readouterr().err
    code, _ = run("norm", "--file", str(tmp_path / "missing.jsonl"), "--s", "0", "--p", "1",
                  "--q", "1", "--rho", "-1/2")
    assert code == 2


def test_experiment_membership_and_strictness():
    code, out = run("experiment", "--element", "delta", "--s", "-1", "--p", "2", "--q", "1",
                    "--rho", "-1/2", "--n", "1")
    obj = json.loads(out)
    assert code == 0 and obj["status"] == "agree" and obj["numeric"] == "Finite"
    code, out = run("experiment", "--kind", "strictness", "--s", "0", "--p", "2", "--q", "1",
                    "--rho", "-1/2", "--n", "1")
    obj = json.loads(out)
    assert code == 0 and obj["sub_unbounded"] and obj["sup_bounded"]
    code, _ = run("experiment", "--kind", "strictness", "--s", "0", "--p", "2", "--q", "inf",
                  "--rho", "-1/2", "--n", "1")
    assert code == 2


def test_experiment_batch():
    code, out = run("experiment", "--kind", "batch", "--element", "delta", "--count", "20",
                    "--n-values", "1,2", "--jmax", "10")
    obj = json.loads(out)
    assert code == 0 and obj["total"] == 20 and obj["disagree"] == 0


def test_diagram_canonical_matches_library(tmp_path):
    path = tmp_path / "linfty.svg"
    code, _ = run("diagram", "--canonical", "linfty", "--out", str(path))
    assert code == 0 and path.read_text(encoding="utf-8") == canonical_svg("linfty")


def test_diagram_is_deterministic():
    argv = ("diagram", "--predicate", "truncation", "--flavor", "sub", "--rho", "-1/2",
            "--n", "1", "--resolution", "12")
    assert run(*argv) == run(*argv)


def test_diagram_unwritable_path(tmp_path, capsys):
    code, _ = run("diagram", "--canonical", "haar", "--out", str(tmp_path / "no" / "x.svg"))
    assert code == 2 and "cannot write" in capsys.readouterr().err


def test_sweep_outputs():
    code, out = run("sweep", "--predicate", "chi", "--rho", "-1/2", "--n", "1",
                    "--resolution", "8")
    assert code == 0 and len(out.splitlines()) == 65
    code, out = run("sweep", "--predicate", "chi", "--rho", "-1/2", "--n", "1",
                    "--resolution", "8", "--format", "json")
    assert sum(json.loads(out)["counts"].values()) == 64
    code, _ = run("sweep", "--predicate", "chi", "--rho", "-1/2", "--n", "1", "--resolution", "4")
    assert code == 2


@pytest.mark.skipif(shutil.which("mskit") is None, reason="console script not installed")
def test_console_script_exit_codes():
    ok = subprocess.run(["mskit", "classify", "--predicate", "linfty", "--s", "1", "--p", "2",
                         "--q", "1", "--rho", "-1", "--n", "2"], capture_output=True, text=True)
    assert ok.returncode == 0 and json.loads(ok.stdout)["status"] == "holds"
    bad = subprocess.run(["mskit", "classify", "--predicate", "linfty"], capture_output=True,
                         text=True)
    assert bad.returncode == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mskit.cli", "sweep", "--rho", "-1", "--n", "2",
                        "--resolution", "8"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("inv_p,s,status")
