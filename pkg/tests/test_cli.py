import io
import json

import pytest

from iptk.cli import _growth, run


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, json.loads(out.getvalue())


def test_parse_command():
    code, payload = invoke("parse", "-f", "p & q | r -> s")
    assert code == 0
    assert payload["formula"] == "p & q | r -> s"
    assert payload["variables"] == ["p", "q", "r", "s"]


def test_parse_errors_are_usage_errors():
    code, payload = invoke("parse", "-f", "p ->")
    assert code == 2
    assert payload["status"] == "usage"


def test_missing_subcommand_is_a_usage_error():
    assert run([], io.StringIO()) == 2


def test_decide_and_check_round_trip(tmp_path):
    code, payload = invoke("decide", "-f", "((p -> q) -> p) -> p")
    assert code == 0
    assert payload["verdict"] == "refuted"

    proof_file = tmp_path / "proof.json"
    code, payload = invoke("decide", "-f", "p -> q -> p", "--proof-out", str(proof_file))
    assert payload["verdict"] == "provable"
    assert proof_file.exists()

    code, payload = invoke("check-proof", str(proof_file), "--conclusion", "p -> q -> p")
    assert code == 0 and payload["status"] == "ok"
    code, payload = invoke("check-proof", str(proof_file), "--conclusion", "q -> p -> q")
    assert code == 1 and payload["status"] == "rejected"


def test_decide_in_an_extension():
    code, payload = invoke("decide", "-f", "(p -> q) | (q -> p)", "--logic", "lc-disj")
    assert code == 0
    assert payload["verdict"] == "provable"


def test_generate_family_member():
    code, payload = invoke("gen", "--family", "alpha", "--n", "2")
    assert code == 0
    assert payload["formula"] == "(p0 -> p1) -> p2"


@pytest.mark.parametrize("family", ["eq2", "eq6"])
def test_generate_clique_colour_members(family):
    code, payload = invoke("gen", "--family", family, "--n", "1")
    assert code == 0
    assert payload["family"] == family
    assert "s0" in payload["formula"] and "r0" in payload["formula"]


def test_transform_writes_certificates(tmp_path):
    target = tmp_path / "plus.json"
    code, payload = invoke("transform", "--kind", "plus", "-f", "p | (p -> F)", "-o", str(target))
    assert code == 0
    assert payload["output"] == "(_u0 -> p) -> p | (p -> _u0)"
    assert json.loads(target.read_text())["backward"]


def test_separation_proof_command():
    code, payload = invoke("--seed", "1", "sep", "--n", "1")
    assert code == 0
    assert payload["kind"] == "SF"


def test_algebra_and_model_evaluation(tmp_path):
    code, payload = invoke("algebra-eval", "--algebra", "wronski-i",
                           "-f", "((x -> y) -> z) -> ((y -> x) -> z) -> z")
    assert code == 0
    assert payload["validates"] is False

    model = {"points": ["a", "b"], "leq": [["a", "b"]], "val": {"b": ["p"]}}
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model))
    code, payload = invoke("model-eval", "--model", str(path), "-f", "p | (p -> F)")
    assert payload["forced"] == {"a": False, "b": True}
    assert payload["valid"] is False


def test_missing_files_are_reported(tmp_path):
    code, payload = invoke("check-proof", str(tmp_path / "absent.json"))
    assert code == 2
    assert payload["status"] == "error"


def test_bench_and_stats():
    code, payload = invoke("bench", "sep", "--max-n", "2")
    assert code == 0
    assert [row["n"] for row in payload["rows"]] == [1, 2]
    assert payload["growth_exponent"] is not None
    code, payload = invoke("stats")
    assert "prover_budget" in payload["config"]
    assert payload["metrics"]["checks"] >= 0


def test_growth_fit():
    assert _growth([1], [5]) is None
    assert _growth([1, 2, 4], [1, 4, 16]) == pytest.approx(2.0)
