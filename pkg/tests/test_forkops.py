import itertools

import pytest

from forkpick.figures import example
from forkpick.forkops import (CherryPickingSequence, ForkOp, ForkPickingSequence, apply_op,
                              applicable_ops, check_cherry_picking_sequence,
                              check_fork_picking_sequence, check_special_sequence, cherry_counts,
                              cherry_to_fork, fork_to_cherry)
from forkpick.model import InputError, cherries, isomorphic
from forkpick.newick import parse_tree
from forkpick.search import min_weight_fork_picking
from props import LABELS4, all_pairs, has_three_or_four_fork

FIG5 = example("fig5")
T5, T5P = FIG5.trees
SEQ5 = FIG5.sequence
PRINTED = ForkPickingSequence.from_json(FIG5.extra["printed_sequence"])
PRINTED_T = parse_tree(FIG5.extra["printed_t"])


def ops(*texts):
    return tuple(ForkOp.parse(t) for t in texts)


def test_op_text_round_trip():
    op = ForkOp.parse("o2(x5)@1")
    assert (op.kind, op.leaf, op.fork_tree) == (2, "x5", 1)
    assert str(op) == "o2(x5)"
    with pytest.raises(InputError):
        ForkOp.parse("o4(x)")
    with pytest.raises(InputError):
        ForkOp.parse("o1(x)@2")


def test_op_json_round_trip():
    for op in applicable_ops(T5, T5P):
        assert ForkOp.from_json(op.to_json()) == op


def test_isomorphic_trees_only_have_kind_zero_on_cherries():
    t = parse_tree("((a,b),(c,d));")
    found = applicable_ops(t, t)
    assert {(op.kind, op.leaf) for op in found} == {(0, x) for x in "abcd"}


def test_ops_sorted_by_kind_then_leaf():
    for t1, t2 in all_pairs(LABELS4)[:60]:
        found = applicable_ops(t1, t2)
        assert [(o.kind, o.leaf) for o in found] == sorted((o.kind, o.leaf) for o in found)


def test_figure_two_has_no_kind_zero():
    fig2 = example("fig2")
    assert not cherries(fig2.t) & cherries(fig2.t_prime)
    assert all(op.kind != 0 for op in applicable_ops(*fig2.trees))


def test_fig5_operations():
    found = {(op.kind, op.leaf, op.fork_tree) for op in applicable_ops(T5, T5P)}
    assert (2, "x5", 1) in found
    # on the pair where T* holds the 4-fork ((x3,x4),(x5,y)) the kind-3 op is available
    found = {(op.kind, op.leaf) for op in applicable_ops(PRINTED_T, T5P)}
    assert (3, "x5") in found


def test_apply_kind_zero():
    t = parse_tree("((a,b),c);")
    a, b = apply_op(t, t, ForkOp(0, "a"))
    assert a.newick() == b.newick() == "(b,c);"


def test_apply_kind_two_leaves_a_common_cherry():
    # T* has (z,(x,y)), the other tree has cherry {x,z}; removing x leaves cherry {z,y}
    t1 = parse_tree("((z,(x,y)),w);")
    t2 = parse_tree("(((x,z),y),w);")
    op = next(o for o in applicable_ops(t1, t2) if o.kind == 2 and o.leaf == "x")
    a, b = apply_op(t1, t2, op)
    assert frozenset("yz") in cherries(a)


def test_apply_to_two_leaves_gives_single_leaf():
    t = parse_tree("(a,b);")
    a, b = apply_op(t, t, ForkOp(0, "a"))
    assert a.leaves == b.leaves == {"b"} and not a.edges


def test_apply_rejects_inapplicable():
    t = parse_tree("((a,b),(c,d));")
    with pytest.raises(InputError) as info:
        apply_op(t, t, ForkOp(1, "a"))
    assert "two different cherries" in str(info.value)


def test_special_sequence_on_fig5():
    assert check_special_sequence(T5, T5P, SEQ5.ops[:3])
    swapped = (SEQ5.ops[1], SEQ5.ops[0], SEQ5.ops[2])
    verdict = check_special_sequence(T5, T5P, swapped)
    assert not verdict and verdict.reason


def test_single_kind_one_is_special():
    t1 = parse_tree("((p,x),(q,r));")
    t2 = parse_tree("((q,x),(p,r));")
    assert check_special_sequence(t1, t2, ops("o1(x)"))


def test_printed_sequence_breaks_the_clade_condition():
    """The printed sequence is rejected on every pair; on the pair where its
    prefix applies, the diagnostic names the lca condition."""
    verdict = check_fork_picking_sequence(PRINTED_T, T5P, PRINTED)
    assert not verdict
    assert "property (iii)" in verdict.reason
    assert not check_fork_picking_sequence(T5, T5P, PRINTED)
    # without that condition the sequence would certify weight 1, yet the pair needs 2
    assert min_weight_fork_picking(PRINTED_T, T5P).optimum == 2


def test_printed_sequence_order_matches_cherry_counts():
    assert cherry_counts(PRINTED_T, T5P, FIG5.extra["cherry_order"]) == (1, 1, 1, 0, 0)


def test_fig5_fork_picking_sequence():
    verdict = check_fork_picking_sequence(T5, T5P, SEQ5)
    assert verdict
    assert SEQ5.weight == 1
    assert SEQ5.blocks() == [("S", 0, 3), ("C", 3, 5)]
    short = ForkPickingSequence(SEQ5.ops[:-1])
    assert not check_fork_picking_sequence(T5, T5P, short)


def test_all_kind_zero_on_isomorphic_trees():
    t = parse_tree("(((a,b),c),d);")
    seq = ForkPickingSequence(ops("o0(a)", "o0(b)", "o0(c)"))
    assert check_fork_picking_sequence(t, t, seq) and seq.weight == 0
    assert seq.blocks() == [("C", 0, 3)]


def test_cherry_sequences_on_fig5():
    order = FIG5.extra["cherry_order"]
    assert cherry_counts(T5, T5P, order) == (1, 1, 1, 0, 0)
    cps = CherryPickingSequence(order, (1, 1, 1, 0, 0))
    assert check_cherry_picking_sequence(T5, T5P, cps)
    assert not check_cherry_picking_sequence(T5, T5P, CherryPickingSequence(order, (1, 1, 0, 0, 0)))
    bad = CherryPickingSequence(("x2", "x3", "x4", "x5", "x1"), ())
    verdict = check_cherry_picking_sequence(T5, T5P, bad)
    assert not verdict and "step 1" in verdict.reason


def test_caterpillar_inward_all_zero():
    t = parse_tree("((((a,b),c),d),e);")
    assert cherry_counts(t, t, ["a", "b", "c", "d"]) == (0, 0, 0, 0)


def test_fork_to_cherry_on_fig5():
    cps = fork_to_cherry(SEQ5)
    assert cps.order == ("x5", "x3", "x4", "x1", "x2")
    assert cps.counts == (1, 1, 1, 0, 0)
    assert check_cherry_picking_sequence(T5, T5P, cps)


def test_cherry_to_fork_on_fig5():
    cps = CherryPickingSequence(FIG5.extra["cherry_order"], (1, 1, 1, 0, 0))
    seq = cherry_to_fork(T5, T5P, cps)
    assert check_fork_picking_sequence(T5, T5P, seq)
    assert seq.weight == 3
    assert [op.kind for op in seq.ops] == [1, 1, 1, 0, 0]


def test_cherry_to_fork_all_zero():
    t = parse_tree("((a,b),(c,d));")
    cps = CherryPickingSequence(("a", "c", "b"), (0, 0, 0))
    assert check_cherry_picking_sequence(t, t, cps)
    assert cherry_to_fork(t, t, cps).weight == 0


def test_no_valid_cherry_sequence_ends_with_one():
    for t1, t2 in all_pairs(LABELS4):
        for order in itertools.permutations(sorted(t1.leaves), 3):
            try:
                counts = cherry_counts(t1, t2, order)
            except InputError:
                continue
            assert counts[-1] == 0


def test_conversions_validate_on_all_small_pairs():
    for t1, t2 in all_pairs(LABELS4):
        res = min_weight_fork_picking(t1, t2)
        if not res.feasible:
            continue
        cps = fork_to_cherry(res.witness)
        assert check_cherry_picking_sequence(t1, t2, cps)
        assert check_fork_picking_sequence(t1, t2, cherry_to_fork(t1, t2, cps))


def test_suffix_validates_after_prefix():
    for t1, t2 in all_pairs(LABELS4):
        res = min_weight_fork_picking(t1, t2)
        if not res.feasible:
            continue
        seq = res.witness
        cuts = [0] + [b for _, _, b in seq.blocks()]
        for cut in cuts[:-1]:
            a, b = t1, t2
            for op in seq.ops[:cut]:
                a, b = apply_op(a, b, op)
            assert check_fork_picking_sequence(a, b, ForkPickingSequence(seq.ops[cut:]))


def test_sequence_json_round_trip():
    data = SEQ5.to_json()
    assert data["blocks"] == [["S", 0, 3], ["C", 3, 5]] and data["weight"] == 1
    back = ForkPickingSequence.from_json(data)
    assert [str(o) for o in back.ops] == [str(o) for o in SEQ5.ops]
    assert check_fork_picking_sequence(T5, T5P, back)


def test_every_tree_has_a_small_fork():
    from forkpick.oracle import enumerate_trees

    for n in range(3, 7):
        for t in enumerate_trees([f"x{i}" for i in range(n)]):
            assert has_three_or_four_fork(t)


def test_isomorphic_check_used_by_lower_bound():
    assert not isomorphic(T5, T5P)
