import json

import pytest

from priosynth.cli import main

from conftest import MODELS


def _args(cmd, model, query=None, **kw):
    out = [cmd, "--model", str(MODELS / f"{model}.net")]
    if query:
        out += ["--query", str(MODELS / f"{query}.q")]
    for flag, value in kw.items():
        out += [f"--{flag.replace('_', '-')}", str(value)]
    return out


def test_synth_n2(tmp_path, capsys, solver_binary):
    code = main(
        _args("synth", "n2", "n2-err", max=10, out=tmp_path, solver=solver_binary)
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "outcome: priorities-found" in out
    report = json.loads((tmp_path / "n2.report.json").read_text())
    assert report["schema_version"] == 1
    assert len(report["priorities"]) == 3
    assert (tmp_path / "n2.rho.net").exists()


def test_synth_safe_model(tmp_path, capsys, solver_binary):
    code = main(
        _args("synth", "safe", "safe-err", max=6, out=tmp_path, solver=solver_binary)
    )
    assert code == 0
    assert "error unreachable up to bound 6" in capsys.readouterr().out
    assert not (tmp_path / "safe.rho.net").exists()


def test_synth_chain_is_nonzero(tmp_path, capsys, solver_binary):
    code = main(
        _args("synth", "chain", "chain-err", max=5, out=tmp_path, solver=solver_binary)
    )
    assert code == 1
    assert "initial-is-error" in capsys.readouterr().out


def test_missing_solver_binary_exits_2(tmp_path, capsys):
    code = main(
        _args("synth", "n2", "n2-err", out=tmp_path, solver="/does/not/exist")
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_check_witness(capsys, solver_binary):
    code = main(_args("check", "n1", "n1-err", max=5, solver=solver_binary))
    out = capsys.readouterr().out
    assert code == 0
    assert "reachable at depth 3" in out
    assert "step 1: e ->" in out


def test_check_unreachable(capsys, solver_binary):
    code = main(_args("check", "safe", "safe-err", max=4, solver=solver_binary))
    assert code == 0
    assert "unreachable up to depth 4" in capsys.readouterr().out


def test_transform_round_trip(tmp_path, capsys, solver_binary):
    assert (
        main(_args("synth", "n2", "n2-err", max=10, out=tmp_path, solver=solver_binary))
        == 0
    )
    code = main(
        _args(
            "transform",
            "n2",
            out=tmp_path / "again",
            priorities=tmp_path / "n2.report.json",
        )
    )
    assert code == 0
    first = (tmp_path / "n2.rho.net").read_text()
    second = (tmp_path / "again" / "n2.rho.net").read_text()
    assert first == second
    assert (tmp_path / "again" / "n2.edits.txt").read_text().count("=>") == 3


def test_transform_rejects_mismatched_priorities(tmp_path, capsys, solver_binary):
    assert (
        main(_args("synth", "n2", "n2-err", max=10, out=tmp_path, solver=solver_binary))
        == 0
    )
    code = main(
        _args("transform", "n1", out=tmp_path, priorities=tmp_path / "n2.report.json")
    )
    assert code == 2


def test_simulate_exhaustive_flags_error(capsys):
    code = main(_args("simulate", "n1", "n1-err", depth=3) + ["--exhaustive"])
    out = capsys.readouterr().out
    assert code == 0
    assert "[ERROR]" in out
    assert "12 states within depth 3" in out


def test_simulate_random_is_seed_deterministic(capsys):
    main(_args("simulate", "n1", depth=6, seed=11))
    first = capsys.readouterr().out
    main(_args("simulate", "n1", depth=6, seed=11))
    assert capsys.readouterr().out == first


def test_export_dot(capsys):
    code = main(_args("export", "n1", format="dot"))
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("digraph") == 2
    assert sum(line.count('" -> "') for line in out.splitlines()) == 11


def test_export_smt2_declares_step_vars(capsys):
    code = main(_args("export", "n1", format="smt2", max=1))
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("declare-const") == 16


def test_unreadable_model_exits_2(tmp_path, capsys):
    code = main(["check", "--model", str(tmp_path / "ghost.net")])
    assert code == 2
