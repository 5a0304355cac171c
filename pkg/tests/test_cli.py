import json
import subprocess
import sys

import pytest

from edgestat.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, expand_specs, main
from edgestat.constructions import bipartite_law
from edgestat.enumeration import JointDistribution
from edgestat.hypercore import from_text
from edgestat.search import SearchResult


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def p3_file(tmp_path):
    path = tmp_path / "p3.txt"
    path.write_text("3 2\n0 1\n1 2\n")
    return path


def test_dist_exact(capsys, p3_file):
    code, out, _ = run(capsys, "dist", "--graph", str(p3_file), "--k", "2", "--exact")
    assert code == EXIT_OK
    body = json.loads(out)
    assert body["marginal"] == {"0": "1", "1": "2"}
    assert JointDistribution.from_json_obj(body["distribution"]).marginal() == {0: 1, 1: 2}
    assert len(body["manifest"]["inputs"]) == 1
    assert "timestamp" not in body["manifest"] or body["manifest"]["timestamp"] is None


def test_dist_construction_matches_block_law(capsys):
    code, out, _ = run(capsys, "dist", "--construct", "bipartite_kminus1", "--n", "40",
                       "--k", "4", "--exact")
    assert code == EXIT_OK
    prob = {int(l): p for l, p in json.loads(out)["probability"].items()}
    law = bipartite_law(40, 4)
    assert {l: str(p) for l, p in law.items()} == prob


def test_dist_csv(capsys, p3_file):
    code, out, _ = run(capsys, "dist", "--graph", str(p3_file), "--k", "2", "--format", "csv")
    assert code == EXIT_OK and out.splitlines()[0] == "l,m,count"


def test_usage_errors(capsys, tmp_path):
    code, _, err = run(capsys, "dist", "--graph", str(tmp_path / "missing.txt"), "--k", "2")
    assert code == EXIT_USAGE and "error" in err
    code, _, _ = run(capsys, "dist", "--k", "2")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "nosuch")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "construct", "bipartite_kminus1", "--n", "10", "--k", "4")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "check-lemmas", "nope")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "search", "--n", "12", "--k", "3", "--l", "1")
    assert code == EXIT_USAGE


def test_sample_seed_recorded(capsys, p3_file):
    code, out, _ = run(capsys, "sample", "--graph", str(p3_file), "--k", "2", "--l", "1",
                       "--samples", "2000")
    assert code == EXIT_OK
    body = json.loads(out)
    seed = body["manifest"]["seed"]
    assert isinstance(seed, int)
    code, again, _ = run(capsys, "sample", "--graph", str(p3_file), "--k", "2", "--l", "1",
                         "--samples", "2000", "--seed", str(seed))
    assert json.loads(again)["estimate"] == body["estimate"]


def test_sample_target_exit(capsys, p3_file):
    base = ["sample", "--graph", str(p3_file), "--k", "2", "--l", "1", "--samples", "20000",
            "--seed", "1"]
    assert run(capsys, *base, "--target", "0.6667", "--tolerance", "0.01")[0] == EXIT_OK
    assert run(capsys, *base, "--target", "0.2", "--tolerance", "0.01")[0] == EXIT_VIOLATION


def test_construct_round_trip(capsys, tmp_path):
    out_file = tmp_path / "g.txt"
    code, _, _ = run(capsys, "construct", "gnp_one", "--n", "30", "--k", "5", "--seed", "3",
                     "--out", str(out_file))
    assert code == EXIT_OK
    H = from_text(out_file.read_text())
    assert H.meta["construction"]["seed"] == 3
    code, out, _ = run(capsys, "construct", "planted_clique", "--n", "12", "--k", "4",
                       "--m", "2", "--law")
    assert json.loads(out)["law"]


def test_check_bounds_corpus(capsys, tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "a.txt").write_text("5 2\n0 1\n1 2\n")
    (corpus / "b.txt").write_text("5 2\n")
    code, out, _ = run(capsys, "check-bounds", "--corpus", str(corpus), "--spec", "propo1",
                       "--c", "1", "--k", "5", "--out-dir", str(tmp_path / "rep"))
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "graph,spec,observed,bound,pass,slack"
    assert all(line.split(",")[4] in ("true", "vacuous") for line in lines[1:])
    rep = json.loads((tmp_path / "rep" / "report.json").read_text())
    assert rep["summary"]["violations"] == 0
    # an inapplicable spec is marked as such
    code, out, _ = run(capsys, "check-bounds", "--corpus", str(corpus), "--spec", "propo2",
                       "--c", "1", "--k", "5", "--l", "1")
    assert code == EXIT_OK
    assert all(line.split(",")[4] == "inapplicable" for line in out.splitlines()[1:])


def test_check_bounds_catalog_jobs_identical(capsys):
    args = ["check-bounds", "--corpus", "catalog:5", "--spec", "thm_hyper_1e",
            "--spec", "propo3", "--eps", "0.3", "--format", "json"]
    a = run(capsys, *args)
    b = run(capsys, *args, "--jobs", "3")
    assert a[0] == b[0] == EXIT_OK
    assert a[1] == b[1]


def test_expand_specs_grid():
    specs = expand_specs(["propo3"], 5, 2, epss=[1, 2])
    assert len(specs) == sum(k + k * (k - 1) // 2 for k in range(1, 6)) * 2


def test_check_lemmas(capsys, tmp_path):
    code, out, _ = run(capsys, "check-lemmas", "rho-identity", "--max-n", "4")
    assert code == EXIT_OK
    body = json.loads(out)
    assert body["summary"] == {"pass": len(body["records"])}
    code2, out2, _ = run(capsys, "check-lemmas", "rho-identity", "--max-n", "4", "--jobs", "2")
    assert out2 == out


def test_search_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "search", "--n", "5", "--k", "3", "--l", "1",
                       "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    res = SearchResult.from_json_obj(json.loads(out))
    assert str(res.best_value) == "9/10"
    assert len(list(tmp_path.iterdir())) == 1
    code, out, _ = run(capsys, "search", "--k", "3", "--l", "1", "--monotone", "3-6")
    assert code == EXIT_OK and json.loads(out)["monotone"]["pass"]
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"iterations": 50, "restarts": 2}))
    args = ["search", "--n", "6", "--k", "3", "--l", "1", "--method", "anneal",
            "--config", str(cfg), "--seed", "4"]
    a = run(capsys, *args)
    b = run(capsys, *args, "--jobs", "2")
    assert a[1] == b[1]
    assert json.loads(a[1])["config"]["restarts"] == 2


def test_report_artifacts(capsys, tmp_path):
    path = tmp_path / "lemmas.json"
    assert run(capsys, "check-lemmas", "pj", "--out", str(path))[0] == EXIT_OK
    code, out, _ = run(capsys, "report", str(path))
    assert code == EXIT_OK
    assert json.loads(out)["artifacts"][0]["status"] == "pass"
    assert run(capsys, "report")[0] == EXIT_USAGE


def test_stamp_and_source_date_epoch(capsys, p3_file, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    code, out, _ = run(capsys, "dist", "--graph", str(p3_file), "--k", "2")
    assert json.loads(out)["manifest"]["timestamp"].startswith("1970-01-01")


def test_console_entry_point(p3_file):
    proc = subprocess.run([sys.executable, "-m", "edgestat.cli", "dist", "--graph",
                           str(p3_file), "--k", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["marginal"] == {"0": "1", "1": "2"}
