from __future__ import annotations

import json

import pytest

from npls.cli import main
from npls.corpus import d2
from npls.derivation import ProofNode
from npls.serialization import derivation_to_json, dumps
from npls.terms import LitFormula


def _lines(capsys):
    out = capsys.readouterr().out
    return out.splitlines()


def test_validate_fixture_by_name(capsys):
    assert main(["validate", "D2"]) == 0
    assert _lines(capsys) == ["ok mode=pls"]
    assert main(["validate", "D3"]) == 0
    assert _lines(capsys) == ["ok mode=npls"]


def test_validate_expands_templates(capsys):
    assert main(["validate", "T-D3", "--x", "4"]) == 0
    assert _lines(capsys) == ["ok mode=npls"]


def _broken_d2_file(tmp_path):
    d = d2()
    nodes = dict(d.nodes)
    seq = tuple(
        LitFormula(f.lit.negate()) if isinstance(f, LitFormula) else f
        for f in nodes[(0,)].sequent
    )
    nodes[(0,)] = ProofNode(seq, nodes[(0,)].rule)
    bad = type(d)(d.end_x, nodes)
    path = tmp_path / "bad.json"
    path.write_text(dumps(derivation_to_json(bad)), encoding="utf-8")
    return path


def test_validate_flags_mutations_with_the_node_path(tmp_path, capsys):
    path = _broken_d2_file(tmp_path)
    assert main(["validate", str(path)]) == 1
    out = capsys.readouterr().out
    assert "(0)" in out


def test_validate_machine_format(tmp_path, capsys):
    path = _broken_d2_file(tmp_path)
    assert main(["validate", str(path), "--format", "machine"]) == 1
    records = [json.loads(line) for line in _lines(capsys)]
    assert records[-1]["ok"] is False
    assert any(r.get("path") == [0] for r in records[:-1])


def test_parse_failure_exits_two(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    assert main(["validate", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_input_exits_two(capsys):
    assert main(["validate", "no-such-fixture"]) == 2
    assert "no file or fixture" in capsys.readouterr().err


def test_fixture_directory_override(tmp_path, monkeypatch, capsys):
    (tmp_path / "mine.json").write_text(
        dumps(derivation_to_json(d2())), encoding="utf-8"
    )
    monkeypatch.setenv("NPLS_FIXTURES", str(tmp_path))
    assert main(["validate", "mine"]) == 0
    assert _lines(capsys) == ["ok mode=pls"]


def test_extract_d3(capsys):
    assert main(["extract", "D3"]) == 0
    lines = _lines(capsys)
    assert lines[0] == "witness=2 verified=true"
    assert lines[1] == "solution=(1)"
    assert lines[2] == "steps=10"


def test_extract_d2(capsys):
    assert main(["extract", "D2", "--mode", "pls"]) == 0
    assert _lines(capsys)[0] == "witness=2 verified=true"


def test_extract_rejects_a_mode_mismatch(capsys):
    assert main(["extract", "D3", "--mode", "pls"]) == 1
    assert "ModeError" in capsys.readouterr().err


def test_extract_machine_format(capsys):
    assert main(["extract", "D3", "--format", "machine"]) == 0
    record = json.loads(_lines(capsys)[0])
    assert record == {"witness": 2, "verified": True, "solution": [1], "steps": 10}


def test_solve_digraph(capsys):
    assert main(["solve", "G1"]) == 0
    lines = _lines(capsys)
    assert lines[-1] == "solution=5 steps=3"


def test_solve_family_and_derivation(capsys):
    assert main(["solve", "NG2"]) == 0
    assert "solution=" in _lines(capsys)[-1]
    assert main(["solve", "D3"]) == 0
    assert _lines(capsys)[-1].startswith("solution=3 ")


def test_verify_fixture_instances(capsys):
    assert main(["verify", "D3"]) == 0
    lines = _lines(capsys)
    assert len(lines) == 9
    assert all("pass" in line for line in lines)
    assert main(["verify", "NG2"]) == 0


def test_verify_rejects_plain_mode(capsys):
    assert main(["verify", "D2"]) == 1
    assert "nested" in capsys.readouterr().err


def test_verify_reports_corrupted_costs(tmp_path, capsys):
    from npls.corpus import ng2
    from npls.nested_graph import CostedDigraph, NestedGraphFamily
    from npls.serialization import family_to_json

    fam = ng2()
    costs = list(fam.graph.costs)
    costs[costs.index(0)] = 99
    bad = NestedGraphFamily(
        CostedDigraph(fam.graph.n_nodes, fam.graph.edges, tuple(costs)),
        fam.rank,
        fam.children,
        fam.solution_to_edge,
    )
    path = tmp_path / "bad-family.json"
    path.write_text(dumps(family_to_json(bad)), encoding="utf-8")
    assert main(["verify", str(path)]) == 1
    out = capsys.readouterr().out
    assert any("cost_decrease" in line and "FAIL" in line for line in out.splitlines())


def test_gen_graph_is_deterministic(capsys):
    assert main(["gen-graph", "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert main(["gen-graph", "--seed", "7"]) == 0
    assert capsys.readouterr().out == first
    assert main(["gen-graph", "--seed", "8"]) == 0
    assert capsys.readouterr().out != first


def test_gen_graph_rank0_writes_a_plain_digraph(capsys):
    assert main(["gen-graph", "--seed", "3", "--max-rank", "0"]) == 0
    record = json.loads(_lines(capsys)[0])
    assert set(record) == {"n", "edges", "costs"}


def test_gen_graph_out_file(tmp_path, capsys):
    out = tmp_path / "family.json"
    assert main(["gen-graph", "--seed", "7", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert main(["validate", "D2", "--out", str(tmp_path / "v.txt")]) == 0
    text = out.read_text(encoding="utf-8")
    assert json.loads(text)["rank"] == 2


def test_generated_file_round_trips_through_solve(tmp_path, capsys):
    out = tmp_path / "family.json"
    assert main(["gen-graph", "--seed", "5", "--out", str(out)]) == 0
    assert main(["solve", str(out)]) == 0
    assert main(["verify", str(out)]) == 0


def test_bench(capsys):
    assert main(["bench", "--seed", "3", "--max-rank", "1", "--max-width", "3"]) == 0
    lines = _lines(capsys)
    assert len(lines) == 3
    assert all(" ok " in line for line in lines)


def test_negative_arguments_are_rejected(capsys):
    assert main(["validate", "D2", "--x", "-1"]) == 1
    assert "non-negative" in capsys.readouterr().err
