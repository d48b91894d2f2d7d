import csv
import io
import json
import math
from pathlib import Path

import pytest

from jacobicomp.cli import ConfigError, main, parse_config

GOLDEN = Path(__file__).parent / "golden"
TAGS = sorted(p.stem for p in GOLDEN.glob("*.json"))
EXPECTED_CODE = {"rauch3-hypothesis": 2}


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def _close(a, b):
    if a == b:
        return True
    try:
        x, y = float(a), float(b)
    except ValueError:
        return False
    if math.isnan(x) and math.isnan(y):
        return True
    return abs(x - y) <= 1e-12 * max(1.0, abs(x), abs(y))


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_every_experiment_has_a_golden():
    tags = {t.split("-hypothesis")[0] for t in TAGS}
    assert tags == {"focal", "index", "lemma-a", "rauch3", "thm-d", "ratio", "quad", "cor-c", "cor-e"}


@pytest.mark.parametrize("tag", TAGS)
def test_golden(tag, capsys):
    code, out, _ = run(["--config", GOLDEN / f"{tag}.json"], capsys)
    assert code == EXPECTED_CODE.get(tag, 0)
    got, want = _rows(out), _rows((GOLDEN / f"{tag}.csv").read_text())
    assert got[0] == want[0]
    assert len(got) == len(want)
    for g, w in zip(got[1:], want[1:]):
        assert len(g) == len(w)
        assert all(_close(a, b) for a, b in zip(g, w)), (g, w)


@pytest.mark.parametrize("tag", TAGS)
def test_byte_identical_reruns(tag, tmp_path, capsys):
    outs = []
    path = tmp_path / "run.csv"
    for _ in range(2):
        run(["--config", GOLDEN / f"{tag}.json", "--out", path], capsys)
        outs.append((path.read_bytes(), (tmp_path / "run.summary.json").read_bytes()))
    assert outs[0] == outs[1]


def test_summary_round_trip(tmp_path, capsys):
    path = tmp_path / "r.csv"
    run(["--config", GOLDEN / "lemma-a.json", "--out", path], capsys)
    summary = json.loads((tmp_path / "r.summary.json").read_text())
    cfg = parse_config(json.dumps(summary["config"]))
    assert cfg.params == parse_config((GOLDEN / "lemma-a.json").read_text()).params
    assert cfg.output == str(path)
    first = path.read_bytes()
    again = tmp_path / "again.json"
    again.write_text(json.dumps(cfg.to_dict()))
    run(["--config", again], capsys)
    assert path.read_bytes() == first


def test_json_format(capsys):
    code, out, _ = run(["--config", GOLDEN / "focal.json", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["t_star"] - math.pi / 2) <= 1e-8


def test_hypothesis_failure_exit_code(capsys):
    code, out, _ = run(["--config", GOLDEN / "rauch3-hypothesis.json", "--format", "json"], capsys)
    assert code == 2
    assert json.loads(out)["failed_checks"] == ["initial_operator_eigenvalues"]


def test_missing_key_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "focal", "params": {"k": 1.0}}))
    code, _, err = run(["--config", cfg], capsys)
    assert code == 3
    assert "params.l" in err


def test_unknown_experiment_and_bad_json(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "warp-drive", "params": {}}))
    assert run(["--config", cfg], capsys)[0] == 3
    cfg.write_text("{not json")
    assert run(["--config", cfg], capsys)[0] == 3
    assert run(["--config", tmp_path / "missing.json"], capsys)[0] == 3


def test_unwritable_output(capsys):
    code, _, err = run(["--config", GOLDEN / "focal.json", "--out", "/nonexistent/dir/x.csv"], capsys)
    assert code == 3


def test_overrides(tmp_path, capsys):
    code, out, _ = run(["--config", GOLDEN / "focal.json", "--steps", "1024"], capsys)
    assert code == 0
    assert abs(float(_rows(out)[1][1]) - math.pi / 2) <= 1e-8
    assert run(["--config", GOLDEN / "focal.json", "--steps", "7"], capsys)[0] == 3
    assert run(["--config", GOLDEN / "quad.json", "--steps", "64"], capsys)[0] == 3
    a = run(["--config", GOLDEN / "cor-c.json", "--seed", "4"], capsys)[1]
    b = run(["--config", GOLDEN / "cor-c.json"], capsys)[1]
    assert a != b


def test_parse_config_errors():
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps({"experiment": "focal", "params": {"k": "one", "l": -1}}))
    msgs = " ".join(info.value.errors)
    assert "params.k" in msgs and "params.l" in msgs
