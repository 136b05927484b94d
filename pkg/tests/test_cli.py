import json
import subprocess
import sys

import pytest

from iphodge.cli import emit_report, main, make_report
from iphodge.complexes import complex_from_json, complex_json, two_term
from iphodge.rings import INTEGERS


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(list(argv) + ["-o", str(out)])
    text = out.read_text() if out.exists() else None
    return code, text


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def no_floats(x):
    if isinstance(x, float):
        return False
    if isinstance(x, dict):
        return all(no_floats(v) for v in x.values())
    if isinstance(x, list):
        return all(no_floats(v) for v in x)
    return True


def test_verify_suite_eta_bockstein(tmp_path):
    code, a = run(["verify-suite", "eta-bockstein", "--seed", "7", "--cases", "100"], tmp_path)
    assert code == 0
    rep = json.loads(a)
    assert rep["ok"] and rep["summary"]["cases"] == "200" and rep["summary"]["failed"] == "0"
    assert no_floats(rep)
    code, b = run(["verify-suite", "eta-bockstein", "--seed", "7", "--cases", "100"], tmp_path, "again.json")
    assert a == b


def test_compare_lists_the_junk_divisor(tmp_path):
    code, text = run(["compare", "--d", "1", "--k", "1", "--p", "2", "--B", "3", "--trunc", "1,8"], tmp_path)
    assert code == 0
    rep = json.loads(text)
    cases = {c["case"]: c for c in rep["cases"]}
    assert "1+q_1+q_1^2" in json.dumps(cases["w=(3/2)"])


def test_malformed_json_exits_2(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", "{not json")
    assert main(["eta", bad, "--f", "2"]) == 2
    assert "cannot read" in capsys.readouterr().err
    shape = write(tmp_path, "shape.json", {"ring": {"kind": "Integers"}, "lo": "0"})
    assert main(["cohomology", shape]) == 2


def test_bad_arguments_exit_2(tmp_path):
    assert main(["no-such-verb"]) == 2
    assert main(["bk-check", "--p", "3", "--B", "2"]) == 2
    assert main(["fv-axioms", "--r", "3", "--k", "2"]) == 2
    assert main(["compare", "--trunc", "0,1"]) == 2


def test_empty_report_is_valid(capsys):
    text = emit_report(make_report("none", {}, []))
    rep = json.loads(text)
    assert rep["summary"] == {"cases": "0", "passed": "0", "failed": "0", "skipped": "0"}
    assert rep["ok"] is True and rep["cases"] == []
    capsys.readouterr()


def test_eta_and_eta_check_on_a_file(tmp_path):
    path = write(tmp_path, "c.json", complex_json(two_term(INTEGERS, 12)))
    code, text = run(["eta", path, "--f", "2"], tmp_path)
    assert code == 0
    rep = json.loads(text)
    assert rep["complex"]["ring"]["kind"] == "Integers"
    code, text = run(["eta-check", path, "--f", "2", "--g", "3"], tmp_path, "chk.json")
    assert code == 0
    verdicts = {c["case"]: c["verdict"] for c in json.loads(text)["cases"]}
    assert verdicts["bockstein-comparison"] == "pass" and verdicts["multiplicativity"] == "pass"
    assert verdicts["base-change"] in ("pass", "skip")
    code, text = run(["bockstein", path, "--f", "2"], tmp_path, "b.json")
    assert code == 0
    code, text = run(["cohomology", path], tmp_path, "h.json")
    assert code == 0 and "12" in text


def test_failure_embeds_the_complex(tmp_path, monkeypatch):
    import iphodge.decalage as dec

    class Bad:
        ok = False
    monkeypatch.setattr(dec, "eta_bockstein_compare", lambda C, f: Bad())
    path = write(tmp_path, "c.json", complex_json(two_term(INTEGERS, 4)))
    code, text = run(["eta-check", path, "--f", "2"], tmp_path)
    assert code == 1
    rep = json.loads(text)
    assert not rep["ok"]
    assert complex_from_json(rep["cases"][0]["complex"]).diffs == two_term(INTEGERS, 4).diffs


def test_witt_verbs(tmp_path):
    one = write(tmp_path, "one.json", {"p": "2", "components": ["1", "0"]})
    code, text = run(["witt", "add", one, one, "--p", "2", "--r", "2"], tmp_path)
    assert code == 0
    comps = json.loads(text)["result"]["components"]
    assert [c["coeffs"] for c in comps] == [["2"], ["-1"]]
    code, _ = run(["witt", "identities", "--p", "3", "--r", "2", "--cases", "10"], tmp_path, "ids.json")
    assert code == 0
    assert main(["witt", "add", one]) == 2


@pytest.mark.parametrize("argv", [
    ["build-qdr", "--d", "1", "--B", "2"],
    ["build-koszul", "--d", "1", "--k", "1", "--B", "1"],
    ["bk-check", "--p", "2", "--B", "4", "--i", "1"],
    ["specialize", "--mode", "q_to_1", "--d", "2", "--B", "2"],
    ["specialize", "--mode", "invert_mu", "--d", "1", "--B", "2"],
    ["fv-build", "--r", "1", "--B", "1", "--process", "pre"],
    ["fv-axioms", "--r", "2", "--B", "2"],
    ["fv-rewrite", "--r", "1", "--B", "2"],
    ["fv-compare", "--r", "1", "--B", "2"],
    ["corpus", "two-term-p-power", "--p", "3", "--a-max", "4"],
    ["verify-suite", "distinguished"],
])
def test_verbs_succeed_and_are_reproducible(argv, tmp_path):
    code, a = run(argv, tmp_path, "a.json")
    assert code == 0, a
    _, b = run(argv, tmp_path, "b.json")
    assert a == b
    assert no_floats(json.loads(a))


def test_corpus_is_seeded(tmp_path):
    argv = ["corpus", "random-free-Z", "--cases", "20"]
    _, a = run(argv + ["--seed", "1"], tmp_path, "a.json")
    _, b = run(argv + ["--seed", "1"], tmp_path, "b.json")
    _, c = run(argv + ["--seed", "2"], tmp_path, "c.json")
    assert a == b and a != c
    assert len(json.loads(a)["complexes"]) == 20


def test_threads_env_gives_identical_reports(tmp_path, monkeypatch):
    argv = ["fv-compare", "--r", "1", "--B", "3", "--p", "3"]
    monkeypatch.setenv("IPHODGE_THREADS", "1")
    _, a = run(argv, tmp_path, "a.json")
    monkeypatch.setenv("IPHODGE_THREADS", "4")
    _, b = run(argv, tmp_path, "b.json")
    assert a == b
    monkeypatch.setenv("IPHODGE_THREADS", "zero")
    assert main(argv) == 2


def test_timing_only_on_request(tmp_path):
    _, a = run(["verify-suite", "distinguished"], tmp_path, "a.json")
    _, b = run(["verify-suite", "distinguished", "--timing"], tmp_path, "b.json")
    assert "timing" not in json.loads(a) and "timing" in json.loads(b)


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.json"
    res = subprocess.run([sys.executable, "-m", "iphodge", "verify-suite", "distinguished", "-o", str(out)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(out.read_text())["ok"] is True
