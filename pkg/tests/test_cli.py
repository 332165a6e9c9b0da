import csv
import io
import json

import pytest

from polyaweb import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_km_check_passes(capsys):
    code, out, _ = run(["km-check", "--norm-max", "3", "--elapsed-max", "2"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][-1] == "verdict"
    assert all(r[-1] == "pass" for r in rows[1:])


def test_failing_verdict_exit_code(capsys):
    code, out, err = run(["sqrt-pi", "--n", "10000"], capsys)
    assert code == 1
    assert "fail" in out


def test_config_errors_exit_two(capsys, tmp_path):
    assert run(["components", "--replicas", "-3"], capsys)[0] == 2
    assert run(["no-such-command"], capsys)[0] == 2
    assert run(["components", "--kernel", "lazy"], capsys)[0] == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("replicas = 10\ncolour = blue\n")
    code, _, err = run(["components", "--config", str(cfg)], capsys)
    assert code == 2 and "unknown key" in err


def test_domain_error_exit_two(capsys):
    assert run(["pair-prob", "--n", "3", "--k", "7"], capsys)[0] == 2


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# pair probability\nn = 4\nk = 2\n")
    parser = cli.build_parser()
    _, params = cli.resolve(parser.parse_args(["pair-prob", "--config", str(cfg), "--k", "1"]))
    assert params["n"] == 4 and params["k"] == 1
    assert params["horizon"] == 10000


def test_output_files(capsys, tmp_path):
    out = tmp_path / "res.csv"
    code = cli.main(["pair-prob", "--n", "3", "--k", "1", "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("experiment,")
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["seed"] == 0
    assert summary["rows"][0]["exact"] == "2/3"


def test_thread_count_does_not_change_csv(capsys):
    base = ["components", "--n", "4", "--replicas", "2000", "--horizon", "500"]
    _, a, _ = run(base + ["--threads", "1"], capsys)
    _, b, _ = run(base + ["--threads", "4"], capsys)
    assert a == b


def test_simulate_web_rows(capsys):
    code, out, _ = run(["simulate-web", "--n", "5", "--horizon", "8", "--seed", "3"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["time", "walker", "x", "y", "component"]
    assert len(rows) == 1 + 6 * 4
    for t, w, x, y, c in rows[1:]:
        assert int(x) + int(y) == int(t)


@pytest.mark.parametrize("check", ["negbinom", "branching"])
def test_yule_checks_run(capsys, check):
    code, out, _ = run(["yule", "--check", check, "--replicas", "3000", "--k", "1"], capsys)
    assert code == 0
