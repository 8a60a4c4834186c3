import json

import pytest

from polybloch import __version__
from polybloch.cli import main

IDENTITY2 = {
    "dimension": 2,
    "map": [[{"multi_index": [1, 0], "re": 1.0, "im": 0.0}], [{"multi_index": [0, 1], "re": 1.0, "im": 0.0}]],
    "p": 1.0,
    "q": 1.0,
    "budget": {"shells": 10, "angular_samples": 64, "refinement_steps": 60},
    "seed": 0,
}
CONSTANT2 = dict(IDENTITY2, map=[[{"multi_index": [0, 0], "re": 0.3, "im": 0.1}], [{"multi_index": [0, 0], "re": -0.2, "im": 0.0}]])


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_analyze_identity(tmp_path, capsys):
    cfg = write(tmp_path, "id.json", IDENTITY2)
    out = tmp_path / "out"
    assert main(["analyze", cfg, "--output-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["bracket"] == {"lower": 1.0, "upper": 4.0}
    assert report["tool_version"] == __version__
    assert len(report["config_digest"]) == 64
    csv = (out / "profile.csv").read_text().splitlines()
    assert csv[0] == "delta,sup,samples" and csv[1].startswith("0.5,2.0,")
    assert "[L/n, 2L] = [1.0, 4.0]" in (out / "summary.txt").read_text()


def test_analyze_constant(tmp_path):
    out = tmp_path / "out"
    assert main(["analyze", write(tmp_path, "c.json", CONSTANT2), "--output-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["compact"]["verdict"] == "likely"
    assert report["bracket"] == {"lower": 0.0, "upper": 0.0}


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"q": 0}, "q must be finite and > 0"),
        ({"p": -1}, "p must be finite and > 0"),
        ({"dimension": 3}, "must match the number of map components"),
        ({"budget": {"delta_schedule": [0.1, 0.2]}}, "strictly decreasing"),
        ({"map": [[{"multi_index": [1], "re": 1}], [{"multi_index": [0, 1], "re": 1}]]}, "multi_index"),
    ],
)
def test_invalid_config(tmp_path, capsys, patch, message):
    cfg = write(tmp_path, "bad.json", dict(IDENTITY2, **patch))
    assert main(["analyze", cfg, "--output-dir", str(tmp_path)]) == 1
    assert message in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["classify", str(tmp_path / "nope.json")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_classify_and_profile(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", CONSTANT2)
    assert main(["classify", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["compact"]["trend"] == "empty_region"
    assert main(["profile", cfg, "--shells", "6"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("delta,sup,samples\n0.5,0.0,0\n")
    assert "bracket" in captured.err


def test_norm_commands(tmp_path, capsys):
    spec = write(tmp_path, "z1.json", {"kind": "poly", "dimension": 2, "terms": [{"multi_index": [1, 0], "re": 1, "im": 0}]})
    assert main(["norm", spec, "--p", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["estimate"]["value"] == pytest.approx(1.0)

    spec = write(tmp_path, "m.json", {"kind": "monomial", "dimension": 1, "m": 10})
    assert main(["norm", spec, "--p", "1", "--exact"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["exact"] == pytest.approx(0.73698987219, rel=1e-10)
    assert doc["estimate"]["value"] == pytest.approx(doc["exact"], rel=1e-3)

    spec = write(tmp_path, "fw.json", {"kind": "fw", "dimension": 1, "w": {"re": 0.5, "im": 0}})
    assert main(["norm", spec, "--p", "2"]) == 0
    est = json.loads(capsys.readouterr().out)["estimate"]
    assert est["value"] <= 4 and "witness_1_re" in est


def test_norm_bad_spec(tmp_path, capsys):
    spec = write(tmp_path, "x.json", {"kind": "sine"})
    assert main(["norm", spec]) == 1
    spec = write(tmp_path, "w.json", {"kind": "fw", "w": {"re": 1.5, "im": 0}})
    assert main(["norm", spec]) == 1
    spec = write(tmp_path, "e.json", {"kind": "poly", "dimension": 1, "terms": []})
    assert main(["norm", spec, "--exact"]) == 1


def test_verify_lemma2(capsys):
    assert main(["verify", "--suite", "lemma2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] and len(doc["reports"]) == 4


def test_verify_unknown_suite(capsys):
    assert main(["verify", "--suite", "lemma9"]) == 1
    err = capsys.readouterr().err
    assert "lemma1" in err and "all" in err


def test_bad_arguments(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze"])
    assert exc.value.code == 1
