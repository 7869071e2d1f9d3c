import copy
import json

import pytest

from enlargement import cli
from enlargement import experiments as X


def tree_spec(**over):
    spec = {"schema": 1, "name": "t3", "kind": "sweep", "seed": 4,
            "graph": {"family": "regular_tree", "params": {"d": 3, "depth": 12}},
            "h": {"recipe": "vertices"}, "property": {"name": "spans_boundary"},
            "estimator": {"grid": [round(0.05 * k, 2) for k in range(1, 20)], "trials": 300},
            "output": "out"}
    spec.update(over)
    return spec


def test_valid_spec_has_empty_report():
    assert X.validate(tree_spec()) == []


@pytest.mark.parametrize("mutate,needle", [
    (lambda s: s["estimator"].update(trials=0), "trials"),
    (lambda s: s.update(schema=2), "schema"),
    (lambda s: s.update(kind="nope"), "kind"),
    (lambda s: s["property"].update(name="nope"), "unknown property"),
    (lambda s: s["graph"].update(family="torus"), "family"),
    (lambda s: s["graph"]["params"].update(depth=60), "budget"),
    (lambda s: s["estimator"].update(grid=[0.5, 0.4]), "increasing"),
    (lambda s: s["estimator"].update(grid=[0.0, 0.5]), "(0, 1)"),
    (lambda s: s.update(seed=-1), "seed"),
    (lambda s: s.update(name="a/b"), "name"),
])
def test_invalid_specs(mutate, needle):
    s = copy.deepcopy(tree_spec())
    mutate(s)
    report = X.validate(s)
    assert report and any(needle in r for r in report)
    with pytest.raises(X.SpecError):
        X.run(s)


def test_scope_violation_transience_disconnected_h():
    s = tree_spec(property={"name": "transient", "params": {"radii": [2, 4, 8]}},
                  h={"recipe": "vertices", "ids": [1, 2]})
    assert any("scope violation" in r for r in X.validate(s))
    s["h"] = {"recipe": "fixed", "vertices": [1, 2], "edges": []}
    assert any("scope violation" in r for r in X.validate(s))
    s["h"] = {"recipe": "fixed", "vertices": [0, 1], "edges": [0]}
    assert X.validate(s) == []


def test_catalog_shape():
    cat = X.catalog()
    assert cat
    kinds = {e["kind"] for e in cat}
    assert "pe_counterexample" in kinds
    for e in cat:
        assert e["ops"] and e["description"]
        assert X.validate(e) == [], e["name"]
    assert [e["name"] for e in cat] == [e["name"] for e in X.catalog("smoke")]
    with pytest.raises(ValueError):
        X.catalog("huge")


def test_tree_sweep_crossing_near_half(tmp_path):
    res = X.run(tree_spec(), tmp_path)
    rows = res.csv_path.read_text().splitlines()
    head = rows[0].split(",")
    assert head[:4] == ["spec_hash", "seed", "window_radius", "schema"]
    for line in rows[1:]:
        assert line.startswith(f"{res.spec_hash},4,12,1,")
    summ = json.loads(res.summary_path.read_text())
    assert summ["provenance"]["spec_hash"] == res.spec_hash
    pts = {float(r.split(",")[4]): float(r.split(",")[7]) for r in rows[1:]}
    assert pts[0.35] < 0.05 < 0.5 < pts[0.8]


def test_run_twice_byte_identical(tmp_path):
    a = X.run(tree_spec(), tmp_path / "a")
    b = X.run(tree_spec(), tmp_path / "b", workers=2)
    assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
    assert a.summary_path.read_bytes() == b.summary_path.read_bytes()


def test_spec_hash_ignores_output_only():
    s = tree_spec()
    t = tree_spec(output="elsewhere")
    assert X.spec_hash(s) == X.spec_hash(t)
    assert X.spec_hash(s) != X.spec_hash(tree_spec(seed=5))


def test_overrides():
    s = X.apply_overrides(tree_spec(), seed=9, window=6)
    assert s["seed"] == 9 and s["graph"]["params"]["depth"] == 6
    assert tree_spec()["graph"]["params"]["depth"] == 12


def test_line_graph_counts_match_brute_force():
    import numpy as np

    from enlargement.graph import build_line_graph
    from enlargement.percolation import sample_config

    g = build_line_graph(6)
    cfg = sample_config(g, 0.5, 3)
    counts = X.line_graph_counts(g, cfg.open_mask)
    want = np.zeros(6, int)
    for m in np.flatnonzero(g.labels[:, 0] == 1):
        es = [e for e in range(g.m) if m in g.edges[e]]
        assert len(es) == 2
        if cfg.open_mask[es].all():
            want[g.labels[m, 1]] += 1
    assert counts.tolist() == want.tolist()


# ---- command line


def test_cli_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "pe_counterexample_t3" in out and "ops:" in out


def test_cli_validate_and_run(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(tree_spec(estimator={"grid": [0.3, 0.6], "trials": 50})))
    assert cli.main(["validate", str(good)]) == 0
    assert cli.main(["run", str(good), "--out", str(tmp_path / "o"), "--seed", "3"]) == 0
    csv = (tmp_path / "o" / "t3.csv").read_text().splitlines()
    assert csv[1].split(",")[1] == "3"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(tree_spec(estimator={"trials": 0})))
    assert cli.main(["validate", str(bad)]) == cli.EXIT_INVALID
    assert cli.main(["run", str(bad)]) == cli.EXIT_INVALID
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_INVALID


def test_cli_runtime_failure_exit_code(tmp_path, monkeypatch):
    from enlargement.graph import ResourceError

    def boom(*a, **k):
        raise ResourceError("out of budget")

    monkeypatch.setitem(X.KINDS, "sweep", X.Kind(X.KINDS["sweep"].check, boom, "x"))
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps(tree_spec()))
    assert cli.main(["run", str(spec), "--out", str(tmp_path)]) == cli.EXIT_RUNTIME


def test_cli_workers_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ENLARGEMENT_WORKERS", "2")
    assert cli.main(["run", "catalog:pe_counterexample_t3", "--profile", "smoke",
                     "--out", str(tmp_path)]) == 0


def test_cli_window_override(tmp_path):
    assert cli.main(["run", "catalog:tree3_sweep", "--profile", "smoke", "--window-override",
                     "10", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "tree3_sweep.csv").read_text().splitlines()[1].split(",")[2] == "10"
