"""The seven acceptance criteria.

Each test prints one ``CRITERION n: PASS|FAIL`` line with its wall time, so
``pytest tests/test_acceptance.py -s`` (or plain ``-v``) doubles as a report.
"""
import time
from contextlib import contextmanager

import pytest

from forkpick.construct import build_network
from forkpick.display import displays, rigidly_displays, weakly_displays
from forkpick.figures import example
from forkpick.forkops import check_fork_picking_sequence
from forkpick.model import canonical_form, isomorphic, networks_isomorphic
from forkpick.netcheck import is_tree_child, temporal_labelling
from forkpick.newick import parse_network, parse_tree, serialize
from forkpick.oracle import (brute_hybrid, census_table, double_factorial, enumerate_networks,
                             enumerate_trees, gap_family)
from forkpick.search import (decide_rigidly_displayable, extract_fork_picking,
                             min_weight_cherry_picking, min_weight_fork_picking)
from props import (LABELS4, LABELS5, all_pairs, check_rigid_witness, display_clauses,
                   has_three_or_four_fork, pair_violations, slice_pairs)


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title):
        start = time.perf_counter()
        details = []
        status = "FAIL"
        try:
            yield details
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            extra = f" [{'; '.join(details)}]" if details else ""
            with capsys.disabled():
                print(f"\nCRITERION {number}: {status} ({elapsed:.1f}s) {title}{extra}")
    return run


def is_ttc(net):
    return is_tree_child(net) and temporal_labelling(net) is not None


def test_criterion_1_fig5(criterion):
    with criterion(1, "fig 5 weight-one reproduction") as notes:
        fig = example("fig5")
        res = min_weight_fork_picking(*fig.trees)
        assert res.optimum == 1
        trace = build_network(*fig.trees, res.witness)
        net = trace.network
        assert net.h == 1 and is_ttc(net)
        assert rigidly_displays(net, *fig.trees) is not None
        back = extract_fork_picking(net, *fig.trees)
        assert back.weight == 1 and check_fork_picking_sequence(*fig.trees, back)
        notes.append(f"s_r={res.optimum}, h(N)={net.h}, extracted weight={back.weight}")


def test_criterion_2_fig2_weak_hybrid(criterion):
    with criterion(2, "fig 2 weak hybrid number by exhaustive search") as notes:
        fig = example("fig2")
        assert len(fig.t.leaves) == 6
        cert = brute_hybrid(*fig.trees, "h_wd", 2)
        assert cert.value == 2 and cert.verify()
        notes.append(f"h_wd={cert.value}, networks examined={cert.examined}")


def test_criterion_3_fig6_triple(criterion):
    with criterion(3, "fig 6 weak/rigid triple") as notes:
        fig = example("fig6")
        weak = brute_hybrid(*fig.trees, "h_wd", 2)
        rigid = brute_hybrid(*fig.trees, "h_r", 3)
        s_r = min_weight_fork_picking(*fig.trees).optimum
        assert weak.value == 1 and weak.verify()
        assert rigid.value == 2 and rigid.verify()
        assert s_r == 2
        notes.append(f"h_wd={weak.value}, h_r={rigid.value}, s_r={s_r}")


def test_criterion_4_gap_family(criterion):
    with criterion(4, "temporal/rigid gap at m=4") as notes:
        fam = gap_family(4)
        n = len(fam.t.leaves)
        assert n == 18
        assert check_fork_picking_sequence(fam.t, fam.t_prime, fam.witness)
        assert fam.witness.weight == 1 and not isomorphic(fam.t, fam.t_prime)
        s_r = min_weight_fork_picking(fam.t, fam.t_prime).optimum
        assert s_r == 1
        h_t = min_weight_cherry_picking(fam.t, fam.t_prime).optimum
        assert h_t >= 3
        assert h_t - s_r >= n / 4 - 3
        notes.append(f"|X|={n}, cherry optimum={h_t}, s_r={s_r}, gap={h_t - s_r}")


def test_criterion_5_fig1_fig3(criterion):
    with criterion(5, "fig 1 and fig 3 display predicates"):
        fig1 = example("fig1")
        assert weakly_displays(fig1.t, fig1.network)
        assert weakly_displays(fig1.t_prime, fig1.network)
        assert not displays(fig1.t_prime, fig1.network)
        fig3 = example("fig3")
        assert weakly_displays(fig3.t, fig3.network)
        assert weakly_displays(fig3.t_prime, fig3.network)
        assert rigidly_displays(fig3.network, *fig3.trees) is None


def _property_violations(pairs, table):
    found = []
    for t1, t2 in pairs:
        tag = f"{t1.newick()} {t2.newick()}"
        fork = min_weight_fork_picking(t1, t2)
        cherry = min_weight_cherry_picking(t1, t2)
        h_r, h_t = table.h_r(t1, t2), table.h_t(t1, t2)
        statements = {fork.feasible, cherry.feasible, h_r is not None, h_t is not None,
                      decide_rigidly_displayable(t1, t2)}
        if len(statements) != 1:
            found.append(f"equivalence: {tag}")
            continue
        if not fork.feasible:
            continue
        if fork.optimum != h_r:
            found.append(f"s_r={fork.optimum} but h_r={h_r}: {tag}")
        trace = build_network(t1, t2, fork.witness)
        net = trace.network
        if not is_ttc(net) or net.h > fork.witness.weight:
            found.append(f"construction: {tag}")
        back = extract_fork_picking(net, t1, t2)
        if back.weight > net.h or not check_fork_picking_sequence(t1, t2, back):
            found.append(f"extraction: {tag}")
        found += [f"{p}: {tag}" for p in check_rigid_witness(net, t1, t2, trace.maps)]
        if not isomorphic(t1, t2):
            found += [f"{p}: {tag}" for p in pair_violations(net, t1, t2, trace.maps)]
        if len(set(display_clauses(net, t1, t2))) != 1:
            found.append(f"display clauses disagree: {tag}")
    return found


def test_criterion_6_property_suite(criterion):
    with criterion(6, "property suite on |X|=4 and a |X|=5 slice") as notes:
        small = all_pairs(LABELS4)
        sample = slice_pairs(LABELS5)
        assert len(small) == 225 and len(sample) == 1000
        violations = _property_violations(small, census_table(LABELS4, 3))
        violations += _property_violations(sample, census_table(LABELS5, 3))
        for n in range(3, 7):
            violations += [f"no small fork: {t.newick()}"
                           for t in enumerate_trees([f"x{i}" for i in range(n)])
                           if not has_three_or_four_fork(t)]
        notes.append(f"{len(small) + len(sample)} pairs, {len(violations)} violations")
        assert violations == [], violations[:10]


def test_criterion_7_round_trips(criterion):
    with criterion(7, "newick round trips and tree counts") as notes:
        checked = 0
        for n in range(2, 6):
            trees = list(enumerate_trees([f"x{i}" for i in range(n)]))
            assert len(trees) == double_factorial(2 * n - 3)
            for t in trees:
                back = parse_tree(t.newick())
                assert isomorphic(t, back) and canonical_form(back) == canonical_form(t)
                checked += 1
        for n in range(2, 5):
            labels = LABELS4[:n]
            for h in range(3):
                for net in enumerate_networks(labels, h, "tree_child"):
                    assert networks_isomorphic(net, parse_network(serialize(net)))
                    checked += 1
        notes.append(f"{checked} objects")
