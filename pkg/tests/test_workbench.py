import json
import logging

import pytest

from main import main
from src.workbench import EXIT_CONSTRUCTION, EXIT_NO, EXIT_OK, RunConfig, Workbench


@pytest.fixture(autouse=True)
def _restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def run_json(capsys, *argv):
    code, captured = run(capsys, *argv)
    return code, json.loads(captured.out)


def test_validate_fixture_file(capsys, data_dir):
    code, report = run_json(capsys, "validate", "--presentation", str(data_dir / "ref2.json"))
    assert code == EXIT_OK
    assert report["valid"] and report["exit_code"] == 0


def test_validate_reports_overlap(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "levels": [[1, 1], [2]],
                "arms": [
                    {"level": 1, "source": 0, "target": 0, "injection": [1]},
                    {"level": 1, "source": 1, "target": 0, "injection": [1]},
                ],
            }
        ),
        encoding="utf-8",
    )
    code, report = run_json(capsys, "validate", "--presentation", str(bad))
    assert code == EXIT_NO
    assert {v["kind"] for v in report["violations"]} == {"overlap", "gap"}


def test_mi_check_wedge(capsys, data_dir):
    code, report = run_json(
        capsys,
        "mi-check",
        "--presentation", str(data_dir / "t3.json"),
        "--ideal", str(data_dir / "t3_wedge_1_2.json"),
    )
    assert code == EXIT_OK
    assert report["verdict"]["status"] == "yes"


@pytest.mark.parametrize("method", ["envelope", "bruteforce"])
def test_mi_check_corner_ideal(capsys, data_dir, method):
    code, report = run_json(
        capsys,
        "mi-check",
        "--presentation", str(data_dir / "t2.json"),
        "--ideal", str(data_dir / "t2_j12.json"),
        "--method", method,
    )
    assert code == EXIT_NO
    assert len(report["verdict"]["witness"]) == 2


def test_prime_check_swap(capsys):
    code, report = run_json(capsys, "prime-check", "--fixture", "swap", "--depth", "4", "--horizon", "2")
    assert code == EXIT_NO
    assert report["verdict"]["status"] == "not-prime"
    assert report["verdict"]["counterexample"] is not None


def test_prime_check_ref2_text(capsys):
    code, captured = run(
        capsys, "prime-check", "--fixture", "ref2", "--depth", "3", "--horizon", "3", "--format", "text"
    )
    assert code == EXIT_OK
    assert "primitive" in captured.out


def test_envelope_command(capsys):
    code, report = run_json(capsys, "envelope", "--fixture", "ref2", "--depth", "2", "--horizon", "1")
    assert code == EXIT_OK
    assert len(report["envelope"]["levels"]) == 2


def test_shallow_working_depth(capsys, data_dir):
    code, report = run_json(
        capsys, "mi-check", "--presentation", str(data_dir / "ref2.json"), "--depth", "2", "--horizon", "3"
    )
    assert code == EXIT_OK
    assert report["verdict"]["primeness"]["method"] == "bounded"
    result = Workbench(RunConfig(command="envelope", fixture="ref2", depth=3, horizon=1)).run()
    assert result.exit_code == EXIT_OK
    assert result.report["envelope"]["lookahead"] == 4


def test_chain_commands(capsys, data_dir):
    chain = str(data_dir / "ref2_chain.json")
    code, report = run_json(capsys, "chain-check", "--fixture", "ref2", "--chain", chain)
    assert code == EXIT_OK and report["check"]["ok"]
    code, report = run_json(
        capsys, "chain-to-ideal", "--fixture", "ref2", "--chain", chain, "--depth", "3", "--horizon", "1"
    )
    assert code == EXIT_OK
    assert report["reliable_depth"] == 3
    assert report["ideal"]["generators"] == []


def test_ideal_to_chain(capsys, data_dir):
    code, report = run_json(
        capsys,
        "ideal-to-chain",
        "--fixture", "const-t3",
        "--ideal", str(data_dir / "t3_wedge_1_2.json"),
        "--depth", "4",
        "--horizon", "2",
    )
    assert code == EXIT_OK
    assert [(u["row"], u["col"]) for u in report["chain"]["units"]] == [(1, 2)] * 4


def test_rep_stage(capsys):
    code, report = run_json(capsys, "rep-stage", "--fixture", "ref2", "--depth", "3", "--horizon", "2")
    assert code == EXIT_OK
    assert report["stage"]["depth"] == 3
    assert report["nest"]["full_stage_nest"]
    assert all(e["status"] == "separated" for e in report["kernel"])


def test_ideal_ops(capsys, data_dir):
    common = ["--presentation", str(data_dir / "t3.json")]
    wedge = str(data_dir / "t3_wedge_1_2.json")
    corner = str(data_dir / "t2_j12.json")
    code, report = run_json(capsys, "ideal-op", *common, "--op", "contains", "--ideal", wedge, "--ideal2", corner)
    assert code == EXIT_NO and report["contains"] is False
    code, report = run_json(capsys, "ideal-op", *common, "--op", "meet", "--ideal", wedge, "--ideal2", corner)
    assert code == EXIT_OK
    units = {(u["row"], u["col"]) for u in report["ideal"]["levels"][0]["units"]}
    assert units == {(1, 3)}
    code, _ = run(capsys, "ideal-op", *common, "--op", "join", "--ideal", wedge)
    assert code == 3


def test_ideal_gen_writes_report(capsys, tmp_path, data_dir):
    out = tmp_path / "ideal.json"
    code, _ = run(
        capsys,
        "ideal-gen",
        "--fixture", "ref2",
        "--depth", "2",
        "--ideal", str(data_dir / "t2_j12.json"),
        "--out", str(out),
    )
    assert code == EXIT_OK
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["command"] == "ideal-gen"
    assert document["ideal"]["depth"] == 2


def test_oracle_commands(capsys):
    code, report = run_json(capsys, "oracle-wedge", "--n", "3")
    assert code == EXIT_OK and report["agrees"]
    code, report = run_json(capsys, "oracle-envelope", "--n", "2")
    assert code == EXIT_OK and report["agrees"]


def test_input_errors_exit_3(capsys, tmp_path, data_dir):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert run(capsys, "validate", "--presentation", str(broken))[0] == 3
    assert run(capsys, "validate", "--presentation", str(tmp_path / "missing.json"))[0] == 3
    lower = tmp_path / "lower.json"
    lower.write_text(json.dumps([{"level": 1, "summand": 0, "row": 2, "col": 1}]), encoding="utf-8")
    assert run(capsys, "mi-check", "--presentation", str(data_dir / "t2.json"), "--ideal", str(lower))[0] == 3
    assert run(capsys, "prime-check", "--fixture", "ref2", "--horizon", "0")[0] == 3
    assert run(capsys, "validate", "--fixture", "ref7")[0] == 3
    assert run(capsys, "oracle-wedge", "--n", "9")[0] == 3


def test_input_error_report_has_location(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    code, report = run_json(capsys, "validate", "--presentation", str(broken))
    assert code == 3
    assert report["error"] == "DataParseError"
    assert report["details"]["line"] == "1"


def test_chain_to_ideal_flags_chain_units_in_ideal(capsys, tmp_path):
    chain = tmp_path / "chain.json"
    chain.write_text(
        json.dumps(
            {
                "start_level": 1,
                "units": [
                    {"level": 1, "summand": 0, "row": 1, "col": 2},
                    {"level": 2, "summand": 0, "row": 1, "col": 1},
                ],
            }
        ),
        encoding="utf-8",
    )
    code, report = run_json(
        capsys, "chain-to-ideal", "--fixture", "const-t2", "--chain", str(chain), "--depth", "2", "--horizon", "1"
    )
    assert code == EXIT_CONSTRUCTION == 4
    assert {"level": 1, "summand": 0, "row": 1, "col": 2} in report["violations"]
