import pytest

from forkpick.model import canonical_form, cherries
from forkpick.netcheck import is_tree_child
from forkpick.newick import ParseError, parse, parse_network, parse_tree, read_any, serialize
from forkpick.oracle import enumerate_trees


def test_simple_tree():
    t = parse_tree("((a,b),c);")
    assert cherries(t) == {frozenset("ab")}


def test_six_leaf_reading():
    t = parse_tree("((1,3),((4,6),(2,5)));")
    assert len(t.leaves) == 6
    assert cherries(t) == {frozenset("13"), frozenset("46"), frozenset("25")}


def test_branch_lengths_and_comments_are_ignored():
    t = parse_tree("((a:1.5,b:2e-3)[note]:0.1,c:7);")
    assert serialize(t) == "((a,b),c);"


@pytest.mark.parametrize("text, fragment", [
    ("((a,b,c),d);", "non-binary"),
    ("((a,b),a);", "duplicate"),
    ("((a,b),c)", "expected ';'"),
    ("((a,b),(c));", ""),
    ("((a,b),c-d);", ""),
])
def test_tree_parse_errors(text, fragment):
    with pytest.raises(ParseError) as info:
        parse_tree(text)
    assert fragment in str(info.value)
    assert "offset" in str(info.value)


def test_network_reading():
    net = parse_network("((a,(b)#H1),(#H1,c));")
    assert net.h == 1
    (r,) = net.reticulations
    assert net.labels[net.children[r][0]] == "b"


def test_minimal_network_with_shortcut_parses():
    net = parse_network("((a)#H1,(#H1,b));")
    assert net.h == 1 and len(net.vertices) == 5


@pytest.mark.parametrize("text", [
    "((a,(b)#H1),(#H1,c),#H1);",   # tag used three times
    "((a,(b)#H1),(c,d));",          # tag used once
    "(((a)#H1,#H1),b);",            # parallel edges
])
def test_network_parse_errors(text):
    with pytest.raises(ParseError):
        parse_network(text)


def test_serialize_orders_children():
    assert serialize(parse_tree("((b,a),c);")) == "((a,b),c);"
    assert serialize(parse_tree("(c,(b,a));")) == "((a,b),c);"


def test_tree_round_trip_up_to_five_leaves():
    for n in range(2, 6):
        for t in enumerate_trees([f"x{i}" for i in range(n)]):
            text = serialize(t)
            back = parse_tree(text)
            assert back == t and serialize(back) == text


def test_network_serialization_is_canonical():
    a = parse_network("((a,(b)#H1),(#H1,c));")
    b = parse_network("((c,#H7),((b)#H7,a));")
    assert serialize(a) == serialize(b)
    assert canonical_form(parse_network(serialize(a))) == canonical_form(a)
    assert is_tree_child(parse_network(serialize(a)))


def test_parse_dispatch_and_files(tmp_path):
    assert parse("((a,b),c);").leaves == {"a", "b", "c"}
    assert parse("((a,(b)#H1),(#H1,c));").h == 1
    path = tmp_path / "t.nwk"
    path.write_text("((a,b),c);\n")
    assert read_any(str(path)).newick() == "((a,b),c);"
    with pytest.raises(Exception):
        read_any(str(tmp_path / "missing.nwk"))
