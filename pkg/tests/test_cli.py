import json

import pytest

from smdg import io as graph_io
from smdg.cli import main
from smdg.model import model_loads, smo_distribution

import cases


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_canon_check_on_canonical_input(tmp_path, capsys):
    path = write(tmp_path, "g.json", graph_io.dumps(cases.canon_example()))
    code, out, _ = run(capsys, "canon", path, "--check")
    assert code == 0
    assert graph_io.loads(out) == cases.canon_example()


def test_canon_check_flags_non_canonical(tmp_path, capsys):
    path = write(tmp_path, "g.json", graph_io.dumps(cases.teaser_a()))
    code, out, _ = run(capsys, "canon", path, "--check")
    assert code == 1


def test_canon_report_steps(tmp_path, capsys):
    path = write(tmp_path, "g.json", graph_io.dumps(cases.teaser_a()))
    report = tmp_path / "steps.json"
    code, out, _ = run(capsys, "--quiet", "canon", path, "--report", str(report))
    assert code == 0
    steps = json.loads(report.read_text())
    assert any(step["op"] == "to_special" for step in steps)


def test_project_and_lift_round_trip(tmp_path, capsys):
    dag_path = write(tmp_path, "g.json", graph_io.dumps(cases.teaser_a()))
    code, out, _ = run(capsys, "project", dag_path)
    assert code == 0
    assert graph_io.loads(out) == cases.canon_example_slp()
    smdg_path = write(tmp_path, "s.json", out)
    code, lifted, _ = run(capsys, "lift", smdg_path)
    assert code == 0
    lifted_graph = graph_io.loads(lifted)
    code, out2, _ = run(
        capsys, "project", write(tmp_path, "l.json", graph_io.dumps(lifted_graph))
    )
    assert graph_io.loads(out2) == cases.canon_example_slp()


def test_lift_reports_cycle(tmp_path, capsys):
    from smdg.graph import SmDG

    g = SmDG.of("ab", edges=[("a", "b"), ("b", "a")])
    path = write(tmp_path, "g.json", graph_io.dumps(g))
    code, _, err = run(capsys, "lift", path)
    assert code == 1
    assert "cycle" in err


def test_equiv_oad_exit_codes(tmp_path, capsys):
    p1 = write(tmp_path, "a.json", graph_io.dumps(cases.latent_fork()))
    p2 = write(tmp_path, "b.json", graph_io.dumps(cases.latent_chain()))
    p3 = write(tmp_path, "c.json", graph_io.dumps(cases.teaser_a()))
    p4 = write(tmp_path, "d.json", graph_io.dumps(cases.teaser_b()))
    assert run(capsys, "equiv-oad", p1, p2)[0] == 0
    assert run(capsys, "equiv-oad", p3, p4)[0] == 1


def test_sep_exit_codes(tmp_path, capsys):
    from smdg.graph import PartitionedDag

    collider = PartitionedDag.of(visible="abc", edges=[("a", "c"), ("b", "c")])
    path = write(tmp_path, "g.json", graph_io.dumps(collider))
    assert run(capsys, "sep", "--criterion", "d", path, "--x", "a", "--y", "b")[0] == 0
    assert run(
        capsys, "sep", "--criterion", "d", path, "--x", "a", "--y", "b", "--z", "c"
    )[0] == 1
    chain = PartitionedDag.of(visible="abc", edges=[("a", "b"), ("b", "c")])
    path = write(tmp_path, "h.json", graph_io.dumps(chain))
    assert run(
        capsys, "sep", "--criterion", "D", path, "--x", "c", "--y", "b", "--z", "a"
    )[0] == 2
    smdg_path = write(tmp_path, "s.json", graph_io.dumps(cases.canon_example_slp()))
    code, out, _ = run(
        capsys, "sep", "--criterion", "sm", smdg_path, "--x", "b", "--y", "d", "--z", "c"
    )
    assert code == 0 and out.strip() == "separated"


def test_eval_smo(tmp_path, capsys):
    from test_model import joint_selector_model

    model = joint_selector_model()
    from smdg.model import model_dumps

    path = write(tmp_path, "m.json", model_dumps(model))
    code, out, _ = run(capsys, "eval", "smo", path)
    assert code == 0
    payload = json.loads(out)
    assert payload["selection_probability"] == "3/8"
    assert payload["distribution"]["table"]["0,0,1"] == "1/3"


def test_eval_smi_needs_q(tmp_path, capsys):
    from test_model import joint_selector_model
    from smdg.model import model_dumps

    path = write(tmp_path, "m.json", model_dumps(joint_selector_model()))
    code, _, err = run(capsys, "eval", "smi", path)
    assert code == 65


def test_eval_ood_with_q(tmp_path, capsys):
    from test_model import joint_selector_model
    from smdg.model import model_dumps

    path = write(tmp_path, "m.json", model_dumps(joint_selector_model()))
    q = {"variables": ["a"], "table": {"0": "1/2", "1": "1/2"}}
    q_path = write(tmp_path, "q.json", json.dumps(q))
    code, out, _ = run(capsys, "eval", "ood", path, "--z", "a", "--q", q_path)
    assert code == 0


def test_equiv_obs_found_and_not_found(tmp_path, capsys):
    p1 = write(tmp_path, "g1.json", graph_io.dumps(cases.canon_example_slp()))
    p2 = write(tmp_path, "g2.json", graph_io.dumps(cases.chain_face_removed()))
    p3 = write(tmp_path, "g3.json", graph_io.dumps(cases.teaser_b_slp()))
    proof_path = tmp_path / "proof.json"
    code, out, _ = run(capsys, "equiv-obs", p1, p2, "--depth", "4",
                       "--proof", str(proof_path))
    assert code == 0
    steps = json.loads(proof_path.read_text())
    assert len(steps) == 4
    code, _, err = run(capsys, "equiv-obs", p2, p3, "--depth", "4")
    assert code == 3
    assert "rule_mdag_lift" in err


def test_oracle_support_cli(tmp_path, capsys):
    structure = {
        "variables": {"a": 2, "b": 2, "c": 2},
        "factors": {"e": ["a", "b", "c"]},
    }
    query = {
        "required": [
            {"assignment": {"a": 1, "b": 0, "c": 0}},
            {"assignment": {"a": 0, "b": 1, "c": 0}},
            {"assignment": {"a": 0, "b": 0, "c": 1}},
        ],
        "forbidden": [
            {"assignment": {"a": 0, "b": 0, "c": 0}},
            {"assignment": {"a": 1, "b": 1, "c": 0}},
            {"assignment": {"a": 1, "b": 0, "c": 1}},
            {"assignment": {"a": 0, "b": 1, "c": 1}},
        ],
    }
    s_path = write(tmp_path, "structure.json", json.dumps(structure))
    q_path = write(tmp_path, "query.json", json.dumps(query))
    code, out, _ = run(capsys, "oracle", "support", s_path, q_path)
    assert code == 0 and json.loads(out)["feasible"]

    structure["factors"] = {"e1": ["a", "b"], "e2": ["a", "c"], "e3": ["b", "c"]}
    s_path = write(tmp_path, "structure2.json", json.dumps(structure))
    code, out, _ = run(capsys, "oracle", "support", s_path, q_path)
    assert code == 1
    payload = json.loads(out)
    assert payload["certificate"]["assignment"] == {"a": 0, "b": 0, "c": 0}


def test_oracle_witness_self_loop(tmp_path, capsys):
    path = write(tmp_path, "g.json", graph_io.dumps(cases.selfloop_shape()))
    code, out, _ = run(capsys, "oracle", "witness", "self-loop", path)
    assert code == 0
    payload = json.loads(out)
    model = model_loads(json.dumps(payload["model"]))
    assert smo_distribution(model).dist.prob((0,)) == 0


def test_enumerate_ndjson_deterministic(tmp_path, capsys):
    code, out1, _ = run(capsys, "enumerate", "smdgs", "--n-visible", "1")
    code, out2, _ = run(capsys, "enumerate", "smdgs", "--n-visible", "1")
    assert code == 0 and out1 == out2
    lines = [json.loads(line) for line in out1.strip().splitlines()]
    assert len(lines) == 8
    code, out3, _ = run(
        capsys, "enumerate", "smdgs", "--n-visible", "1", "--liftable-only"
    )
    assert len(out3.strip().splitlines()) == 5
    code, out4, _ = run(
        capsys, "enumerate", "dags", "--n-visible", "2",
        "--n-marginalized", "1", "--n-selected", "1",
    )
    assert code == 0
    first = out4.strip().splitlines()[0]
    assert graph_io.graph_from_obj(json.loads(first)) is not None


def test_unknown_flag_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        main(["canon", "--bogus"])
    assert err.value.code == 64


def test_invalid_input_exit_code(tmp_path, capsys):
    path = write(tmp_path, "bad.json", "{\"vertices\": 3}")
    code, _, err = run(capsys, "canon", path)
    assert code == 65


def test_dot_output(tmp_path, capsys):
    path = write(tmp_path, "g.json", graph_io.dumps(cases.latent_fork()))
    code, out, _ = run(capsys, "--format", "dot", "project", path)
    assert code == 0 and out.startswith("digraph")
