import json

import pytest

from forkpick.cli import main, run
from forkpick.figures import example
from forkpick.newick import serialize

INFEASIBLE = ("((((a,b),c),d),e);", "(((a,b),(d,e)),c);")


@pytest.fixture
def files(tmp_path):
    """Write figure inputs to disk the way a user would."""
    def write(name, text):
        path = tmp_path / name
        path.write_text(text + "\n")
        return str(path)

    fig5, fig3 = example("fig5"), example("fig3")
    return {
        "f5t": write("fig5_t1.nwk", fig5.t.newick()),
        "f5tp": write("fig5_t2.nwk", fig5.t_prime.newick()),
        "f5net": write("fig5_net.enwk", serialize(fig5.network)),
        "f3t": write("fig3_t1.nwk", fig3.t.newick()),
        "f3tp": write("fig3_t2.nwk", fig3.t_prime.newick()),
        "f3net": write("fig3_net.enwk", serialize(fig3.network)),
        "tree": write("tree.enwk", "((a,b),(c,d));"),
        "seq": write("seq.txt", " ".join(str(op) for op in fig5.sequence.ops)),
        "dir": tmp_path,
    }


def call(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_rigid_hybrid_on_fig5(files, capsys):
    code, out, _ = call(capsys, "hybrid", "--rigid", files["f5t"], files["f5tp"])
    assert code == 0 and json.loads(out)["optimum"] == 1


def test_rigid_check_fails_on_fig3(files, capsys):
    code, out, _ = call(capsys, "check", "--rigid", files["f3t"], files["f3tp"], files["f3net"])
    assert code == 1 and json.loads(out)["result"] is False


def test_rigid_check_passes_on_fig5(files, capsys):
    code, out, _ = call(capsys, "check", "--rigid", files["f5t"], files["f5tp"], files["f5net"])
    data = json.loads(out)
    assert code == 0 and data["result"] and len(data["maps"]) == 2


def test_validate_tree(files, capsys):
    code, out, _ = call(capsys, "validate", files["tree"])
    data = json.loads(out)
    assert code == 0 and data["h"] == 0


def test_validate_non_tree_child(capsys):
    code, out, _ = call(capsys, "validate", serialize(example("fig1").network))
    assert code == 0 and json.loads(out)["is_tree_child"] is False


def test_weak_and_plain_checks(files, capsys):
    fig1 = example("fig1")
    net = serialize(fig1.network)
    assert call(capsys, "check", "--weak", fig1.t_prime.newick(), net)[0] == 0
    assert call(capsys, "check", "--display", fig1.t_prime.newick(), net)[0] == 1


def test_infeasible_pair_exits_one(capsys):
    code, out, _ = call(capsys, "hybrid", "--temporal", *INFEASIBLE)
    assert code == 1 and json.loads(out)["optimum"] == "infeasible"


def test_sequence_output_is_deterministic(files, capsys):
    outs = []
    for _ in range(2):
        code, out, _ = call(capsys, "sequence", files["f5t"], files["f5tp"], "--mode", "cherry")
        data = json.loads(out)
        data["stats"].pop("elapsed")
        outs.append(data)
    assert code == 0 and outs[0] == outs[1]


def test_construct_writes_extended_newick(files, capsys):
    enwk = files["dir"] / "out.enwk"
    code, out, _ = call(capsys, "construct", files["f5t"], files["f5tp"],
                        "--seq", files["seq"], "--enwk", str(enwk))
    assert code == 0 and json.loads(out)["h"] == 1
    assert "#H" in enwk.read_text()


def test_extract_round_trip(files, capsys):
    code, out, _ = call(capsys, "extract", files["f5net"], files["f5t"], files["f5tp"])
    assert code == 0 and json.loads(out)["weight"] == 1
    code, _, err = call(capsys, "extract", files["f3net"], files["f3t"], files["f3tp"])
    assert code in (1, 2) and err


def test_gen_thmbig(capsys):
    code, out, _ = call(capsys, "gen-thmbig", "--m", "3")
    data = json.loads(out)
    assert code == 0 and data["witness"]["weight"] == 1
    assert call(capsys, "gen-thmbig", "--m", "2")[0] == 2


def test_enumerate(capsys):
    code, out, _ = call(capsys, "enumerate", "trees", "5", "--count-only")
    assert code == 0 and out.strip() == "105"
    code, out, _ = call(capsys, "enumerate", "networks", "a,b,c", "--h", "1",
                        "--class", "temporal_tree_child")
    assert code == 0 and all(line.endswith(";") for line in out.splitlines())


def test_dot_command(capsys):
    code, out, _ = call(capsys, "dot", serialize(example("fig5").network))
    assert code == 0 and out.startswith("digraph")


def test_output_file(files, capsys):
    target = files["dir"] / "res.json"
    code, out, _ = call(capsys, "-o", str(target), "hybrid", "--rigid", files["f5t"], files["f5tp"])
    assert code == 0 and not out
    assert json.loads(target.read_text())["optimum"] == 1


def test_weak_oracle(capsys):
    fig6 = example("fig6")
    code, out, _ = call(capsys, "hybrid", "--weak", fig6.t.newick(), fig6.t_prime.newick(), "--cap", "1")
    assert code == 0 and json.loads(out)["value"] == 1


def test_cap_reached_exits_three(capsys):
    fig6 = example("fig6")
    code, out, _ = call(capsys, "hybrid", "--rigid", "--oracle", fig6.t.newick(),
                        fig6.t_prime.newick(), "--cap", "1")
    assert code == 3 and json.loads(out)["value"] == "> 1"


def test_node_limit_exits_three(monkeypatch, files, capsys):
    monkeypatch.setenv("FORKPICK_NODE_LIMIT", "1")
    code, out, _ = call(capsys, "hybrid", "--temporal", files["f5t"], files["f5tp"])
    assert code == 3 and json.loads(out)["optimum"] == "unknown"


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["hybrid", "--rigid", "(a,b);"],
    ["hybrid", "--rigid", "(a,b);", "(a,c);"],
    ["validate", "/nonexistent/file.enwk"],
    ["validate", "((a,b);"],
    ["--jobs", "0", "enumerate", "trees", "3"],
    ["check", "--rigid", "(a,b);", "(a,b);"],
])
def test_input_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
    assert capsys.readouterr().err
