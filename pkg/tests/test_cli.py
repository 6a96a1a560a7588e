import csv
import json
import subprocess
import sys

import pytest

from citeco.cli import main, select_parents
from citeco.graph import CitationIndex


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def ingested(tmp_path, corpus_paths):
    records, edges = corpus_paths
    assert run("ingest", "--records", records, "--edges", edges, "--out", tmp_path) == 0
    return tmp_path


def test_ingest_outputs(ingested):
    report = json.loads((ingested / "run-report.json").read_text())["ingest"]
    assert report == {"raw_records": 414, "canonical_records": 404, "edges": 574, "errors": 2, "warnings": 2}
    issues = [json.loads(x) for x in (ingested / "ingest-report.jsonl").read_text().splitlines()]
    assert sorted((i["level"], i["kind"]) for i in issues) == [
        ("error", "malformed_row"),
        ("error", "unresolved_edge"),
        ("warning", "missing_year"),
        ("warning", "self_citation"),
    ]
    assert all(isinstance(i["row"], int) for i in issues)
    assert "banana" in next(i["message"] for i in issues if i["kind"] == "malformed_row")
    assert len((ingested / "records.jsonl").read_text().splitlines()) == 404


def test_select_analyze_render(ingested, capsys):
    assert run("select", "--out", ingested, "--top-k", 4, "--year-cutoff", 1995) == 0
    parents = (ingested / "parents.txt").read_text().split()
    assert len(parents) == 4
    assert capsys.readouterr().out.split() == parents

    assert run("analyze", "--out", ingested) == 0
    rows = list(csv.DictReader((ingested / "metrics.csv").open()))
    assert {r["parent"] for r in rows} == set(parents)
    assert sum(r["year"] == "full" for r in rows) == 4
    for p in parents:
        assert (ingested / "networks" / f"{p}.json").exists()
    assert (ingested / "events.csv").read_text().startswith("parent,year,delta_R,delta_H,paired\n")
    assert json.loads((ingested / "events-summary.json").read_text())["n_parents"] == 4
    assert (ingested / "field-average.csv").read_text().startswith("year,mean_R,mean_H,parent_count\n")

    assert run("events", "--out", ingested, "--jump-threshold", 0.5) == 0
    assert run("render", "--out", ingested) == 0
    for name in ("reach-bubbles.svg", "entropy-citations.svg", "timelines.svg"):
        assert (ingested / name).read_text().startswith("<?xml")


def test_analyze_network_files(tmp_path):
    assert run("synth", "--variant", "D", "--out", tmp_path / "d") == 0
    assert run("analyze", "--network", tmp_path / "d" / "network.json", "--out", tmp_path / "a") == 0
    lines = (tmp_path / "a" / "metrics.csv").read_text().splitlines()
    assert lines[1] == "0,full,31,5,3,22,2.44444444444,2.82312303008,0.82211227415"
    assert [l.split(",")[1] for l in lines[2:]] == ["1990", "1991", "1992", "1993"]


def test_analyze_isolates_bad_parent(ingested):
    assert run("analyze", "--out", ingested, "--parents", "0,999999") == 0
    report = json.loads((ingested / "run-report.json").read_text())["analyze"]
    assert report["succeeded"] == [0]
    assert report["failures"][0]["parent"] == 999999


def test_analyze_with_no_parents_is_not_an_error(ingested):
    assert run("analyze", "--out", ingested, "--parents", "", "--top-k", 0) == 0
    assert json.loads((ingested / "run-report.json").read_text())["analyze"]["parents"] == 0


def test_synth_growth_and_batch(tmp_path):
    out = tmp_path / "g"
    assert run("synth", "--steps", 10, "--burst", "5:8", "--seed", 4, "--out", out) == 0
    log = [json.loads(x) for x in (out / "growth-log.jsonl").read_text().splitlines()]
    assert len(log) == 10 and log[4]["burst"]

    many = tmp_path / "m"
    assert run("synth", "--count", 3, "--steps", 5, "--out", many) == 0
    assert len((many / "parents.txt").read_text().split()) == 3
    assert run("analyze", "--out", many, "--workers", 2) == 0
    assert json.loads((many / "run-report.json").read_text())["analyze"]["succeeded"] == [
        int(p) for p in (many / "parents.txt").read_text().split()
    ]


def test_config_fills_unset_options(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"steps": 3, "seed": 9}))
    assert run("synth", "--config", cfg, "--steps", 4, "--out", tmp_path) == 0
    assert len((tmp_path / "growth-log.jsonl").read_text().splitlines()) == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["ingest"],
        ["ingest", "--records", "/nonexistent.tsv"],
        ["analyze", "--store", "/nonexistent"],
        ["render", "--store", "/nonexistent"],
        ["synth", "--burst", "nope"],
        ["synth", "--exo-ratio", "2"],
        ["synth", "--count", "0"],
        ["analyze", "--jump-threshold", "0"],
        ["frobnicate"],
    ],
)
def test_bad_input_exits_2(argv, tmp_path, capsys):
    assert run(*argv, *(["--out", tmp_path] if argv[0] != "frobnicate" else [])) == 2
    assert capsys.readouterr().err


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"no_such_option": 1}')
    assert run("synth", "--config", cfg, "--out", tmp_path) == 2


def test_select_parents_ranking():
    years = {0: 1990, 1: 1991, 2: 1999, 3: None, 4: 1990}
    index = CitationIndex([(9, 1), (8, 1), (9, 4), (9, 2), (8, 2), (7, 2)])
    parents, warnings = select_parents(years, index, 2, 1998)
    assert parents == [1, 4]
    assert not warnings
    parents, warnings = select_parents(years, index, 10, 1998)
    assert parents == [1, 4, 0]
    assert warnings


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "citeco", "synth", "--variant", "A", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "network.json").exists()


def test_select_examples():
    index = CitationIndex([(10 + i, 1) for i in range(5)] + [(20 + i, 2) for i in range(3)])
    assert select_parents({1: 1990, 2: 1990}, index, 1, 1998)[0] == [1]
    # tie at rank k goes to the lower blind id
    tied = CitationIndex([(9, 5), (9, 3), (8, 5), (8, 3), (9, 4)])
    assert select_parents({5: 1990, 3: 1990, 4: 1990}, tied, 1, 1998)[0] == [3]
    parents, warnings = select_parents({1: 2005}, index, 3, 1998)
    assert parents == [] and warnings


def test_render_header_only_and_single_row(tmp_path):
    (tmp_path / "metrics.csv").write_text("parent,year,N,C,G,X,R,S_nats,H\n")
    assert run("render", "--out", tmp_path) == 0
    assert "<circle" not in (tmp_path / "reach-bubbles.svg").read_text()
    assert "class=\"axes\"" in (tmp_path / "reach-bubbles.svg").read_text()

    (tmp_path / "metrics.csv").write_text("parent,year,N,C,G,X,R,S_nats,H\n0,1990,7,3,3,0,0,1.5,0.8\n")
    assert run("render", "--out", tmp_path, "--r-min", 4) == 0
    svg = (tmp_path / "reach-bubbles.svg").read_text()
    assert svg.count("<circle") == 1 and 'r="4.00"' in svg


def test_missing_metrics_csv_exits_2(tmp_path):
    assert run("render", "--out", tmp_path) == 2
    assert run("events", "--out", tmp_path) == 2


def test_synth_seed_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert run("synth", "--seed", 42, "--steps", 15, "--exo-ratio", 0.4, "--out", tmp_path / name) == 0
    for f in ("network.json", "growth-log.jsonl", "run-report.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_synth_exo_ratio_zero(tmp_path):
    assert run("synth", "--exo-ratio", 0, "--steps", 10, "--out", tmp_path) == 0
    roles = [n["role"] for n in json.loads((tmp_path / "network.json").read_text())["nodes"]]
    assert "exogenous" not in roles and roles.count("descendant") == 10


def test_prototype_a_metrics_row(tmp_path):
    run("synth", "--variant", "A", "--out", tmp_path)
    run("analyze", "--network", tmp_path / "network.json", "--out", tmp_path)
    row = (tmp_path / "metrics.csv").read_text().splitlines()[1].split(",")
    assert row[:7] == ["0", "full", "7", "3", "3", "0", "0"]
    assert abs(float(row[7]) - 1.589027) < 1e-6


def test_one_bad_parent_only_changes_its_own_outputs(tmp_path):
    store = tmp_path / "store"
    assert run("synth", "--count", 10, "--steps", 12, "--out", store) == 0
    parents = (store / "parents.txt").read_text().split()
    good, mixed = tmp_path / "good", tmp_path / "mixed"
    assert run("analyze", "--store", store, "--parents", ",".join(parents), "--out", good) == 0
    assert run("analyze", "--store", store, "--parents", ",".join(parents + ["123456789"]), "--out", mixed) == 0
    for name in ("metrics.csv", "events.csv", "field-average.csv", "events-summary.json"):
        assert (good / name).read_bytes() == (mixed / name).read_bytes(), name
    assert sorted(p.name for p in (good / "networks").iterdir()) == sorted(p.name for p in (mixed / "networks").iterdir())
    report = json.loads((mixed / "run-report.json").read_text())["analyze"]
    assert [f["parent"] for f in report["failures"]] == [123456789]


def test_hundred_synthetic_parents(tmp_path):
    assert run("synth", "--count", 100, "--steps", 6, "--out", tmp_path) == 0
    assert run("analyze", "--out", tmp_path) == 0
    rows = list(csv.DictReader((tmp_path / "metrics.csv").open()))
    assert len({r["parent"] for r in rows}) == 100
    assert len(list((tmp_path / "networks").iterdir())) == 100
    assert (tmp_path / "field-average.csv").exists()
