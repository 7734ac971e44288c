import itertools

import pytest

from forkpick.display import (DisplayMap, MapLimitExceeded, check_display_map, displays,
                              find_display_maps, gamma_profile, iter_display_maps, pair_gamma,
                              rigid_violation, rigidly_displays, weak_display_map, weakly_displays)
from forkpick.figures import example
from forkpick.model import InputError, PhyloNetwork, canonical_form, isomorphic
from forkpick.newick import parse_network, parse_tree
from forkpick.oracle import enumerate_trees, network_census, network_levels
from props import LABELS4, check_rigid_witness, display_clauses, pair_violations


def identity_map(tree):
    return DisplayMap({v: v for v in tree.postorder}, {e: e for e in tree.edges})


def test_identity_map_is_valid_and_gamma_one():
    t = parse_tree("((a,b),(c,d));")
    net = PhyloNetwork.from_tree(t)
    dm = identity_map(t)
    assert check_display_map(t, net, dm)
    g = gamma_profile(dm, net)
    assert g[net.root] == 0
    assert all(g[v] == 1 for v in net.vertices if v != net.root)


def test_collapsing_to_root_is_not_a_display_map():
    t = parse_tree("((a,b),(c,d));")
    net = PhyloNetwork.from_tree(t)
    psi = {v: (v if v in t.labels else net.root) for v in t.postorder}
    paths = {}
    for u, v in t.edges:
        paths[(u, v)] = (net.root,) if v not in t.labels else (net.root, t.parent[v], v)
    assert not check_display_map(t, net, DisplayMap(psi, paths))


def test_malformed_map_is_an_input_error():
    t = parse_tree("((a,b),c);")
    net = PhyloNetwork.from_tree(t)
    with pytest.raises(InputError):
        check_display_map(t, net, DisplayMap({t.root: t.root}, {}))


def test_tree_into_itself_has_one_map():
    for t in enumerate_trees("abcd"):
        maps = find_display_maps(t, PhyloNetwork.from_tree(t))
        assert len(maps) == 1
        assert maps[0].vertex_image == {v: v for v in t.postorder}


def test_no_map_when_sibling_images_must_share_a_first_edge():
    t = parse_tree("((a,b),(c,d));")
    net = PhyloNetwork.from_tree(parse_tree("((a,c),(b,d));"))
    assert find_display_maps(t, net) == []
    assert not weakly_displays(t, net)
    assert weak_display_map(t, net) is None


def test_map_limit_is_signalled():
    net = example("fig1").network
    t = example("fig1").t
    total = len(find_display_maps(t, net))
    assert total > 1
    with pytest.raises(MapLimitExceeded) as info:
        find_display_maps(t, net, limit=1)
    assert len(info.value.partial) == 1


def test_every_enumerated_map_is_valid():
    net = example("fig3").network
    for tree in example("fig3").trees:
        for dm in iter_display_maps(tree, net):
            assert check_display_map(tree, net, dm)


def test_first_figure():
    fig = example("fig1")
    net = fig.network
    assert weakly_displays(fig.t, net) and weakly_displays(fig.t_prime, net)
    assert find_display_maps(fig.t, net) and find_display_maps(fig.t_prime, net)
    assert displays(fig.t, net)
    assert not displays(fig.t_prime, net)
    low = [pair_gamma(m1, m2, net) for m1 in iter_display_maps(fig.t, net)
           for m2 in iter_display_maps(fig.t_prime, net)]
    assert any(max(g.values()) <= 2 for g in low)
    dm = weak_display_map(fig.t, net)
    assert check_display_map(fig.t, net, dm)


def test_third_figure():
    fig = example("fig3")
    net = fig.network
    assert weakly_displays(fig.t, net) and weakly_displays(fig.t_prime, net)
    assert rigidly_displays(net, fig.t, fig.t_prime) is None
    parents = {p for r in net.reticulations for p in net.parents[r]}
    best = [g for m1 in iter_display_maps(fig.t, net) for m2 in iter_display_maps(fig.t_prime, net)
            for g in [pair_gamma(m1, m2, net)]
            if all(g[v] <= 3 for v in net.vertices)]
    assert best
    assert all(any(g[p] >= 3 for p in parents) for g in best)
    assert any(any(g[p] == 3 for p in parents) for g in best)


def test_fifth_figure_is_rigid():
    fig = example("fig5")
    maps = rigidly_displays(fig.network, *fig.trees)
    assert maps is not None
    assert rigid_violation(fig.network, pair_gamma(*maps, fig.network)) is None
    assert check_rigid_witness(fig.network, fig.t, fig.t_prime, maps) == []


def test_tree_rigidly_displays_itself_with_gamma_two():
    t = parse_tree("((a,b),(c,d));")
    net = PhyloNetwork.from_tree(t)
    maps = rigidly_displays(net, t, t)
    g = pair_gamma(*maps, net)
    assert all(g[v] == 2 for v in net.vertices if v != net.root)


def test_displays_agrees_with_switching_definition_and_implies_weak():
    for level in network_levels(LABELS4, 1, "general"):
        for net in level[:40]:
            for t in enumerate_trees(LABELS4):
                if displays(t, net):
                    assert weakly_displays(t, net)


def test_rigid_search_agrees_with_census():
    # the census is an independent bottom-up pass over gamma vectors
    trees = {t.nested(): t for t in enumerate_trees(LABELS4)}
    for level in network_levels(LABELS4, 2, "temporal_tree_child"):
        for net in level:
            cen = network_census(net)
            rigid = cen.rigid_pairs()
            shapes = sorted(cen.weak, key=repr)
            for s1, s2 in itertools.combinations_with_replacement(shapes, 2):
                t1, t2 = trees[s1], trees[s2]
                maps = rigidly_displays(net, t1, t2)
                assert (maps is not None) == ((s1, s2) in rigid or (s2, s1) in rigid)
                if maps is not None:
                    assert check_rigid_witness(net, t1, t2, maps) == []
                    if not isomorphic(t1, t2):
                        assert pair_violations(net, t1, t2, maps) == []


def test_display_clauses_coincide_on_temporal_tree_child_networks():
    trees = list(enumerate_trees(LABELS4))
    for level in network_levels(LABELS4, 2, "temporal_tree_child"):
        for net in level:
            shown = [t for t in trees if weakly_displays(t, net)]
            for t1, t2 in itertools.product(shown, shown):
                assert len(set(display_clauses(net, t1, t2))) == 1


def test_weak_map_respects_leaf_sets():
    with pytest.raises(InputError):
        weakly_displays(parse_tree("(a,b);"), parse_network("((a,(b)#H1),(#H1,c));"))


def test_displayed_forms_are_canonical():
    net = example("fig6").network
    t, tp = example("fig6").trees
    assert displays(t, net) and displays(tp, net)
    assert canonical_form(t) != canonical_form(tp)
