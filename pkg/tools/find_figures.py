"""Search for the smallest examples matching the stated properties of the
worked figures. The results are frozen in ``forkpick/data/figures.json``.

Run:  python tools/find_figures.py [fig1|fig3|fig5|fig6|fig2 ...]
"""
from __future__ import annotations

import itertools
import json
import sys
import time

from forkpick.construct import build_network
from forkpick.display import (displayed_tree_forms, iter_display_maps, pair_gamma,
                              rigidly_displays)
from forkpick.forkops import ForkOp, ForkPickingSequence, cherry_counts, check_fork_picking_sequence
from forkpick.model import (PhyloNetwork, PhyloTree, canonical_form, cherries, isomorphic,
                            pendant_subtrees)
from forkpick.netcheck import is_tree_child, temporal_labelling
from forkpick.newick import serialize
from forkpick.oracle import (enumerate_trees, insertions, network_census, network_levels)
from forkpick.search import min_weight_cherry_picking, min_weight_fork_picking


def shapes_to_trees(labels):
    return {t.nested(): t for t in enumerate_trees(labels)}


def map_pairs(t1, t2, net, cap=4000):
    maps1 = list(itertools.islice(iter_display_maps(t1, net), cap))
    maps2 = list(itertools.islice(iter_display_maps(t2, net), cap))
    for m1 in maps1:
        for m2 in maps2:
            yield m1, m2, pair_gamma(m1, m2, net)


def passes_through_bad_retic(net, tree, dm):
    rets = set(net.reticulations)
    for (u, _), path in dm.edge_image.items():
        for w in path[1:-1]:
            if w in rets and dm.vertex_image[u] not in net.parents[w]:
                return True
    return False


def fig1():
    labels = ["a", "b", "c", "d"]
    trees = shapes_to_trees(labels)
    for h in (1, 2):
        for net in network_levels(labels, h, "general")[h]:
            if is_tree_child(net):
                continue
            cen = network_census(net)
            shown = {canonical_form(trees[s]): s for s in cen.weak}
            disp = [s for f, s in shown.items() if f in cen.displayed]
            notdisp = [s for f, s in shown.items() if f not in cen.displayed]
            for s1, s2 in itertools.product(sorted(disp, key=repr), sorted(notdisp, key=repr)):
                t1, t2 = trees[s1], trees[s2]
                if any(max(g.values()) <= 2 for _, _, g in map_pairs(t1, t2, net)):
                    return {"t": t1.newick(), "t_prime": t2.newick(), "network": serialize(net)}
    return None


def fig3():
    for labels in (["a", "b", "c", "d"], ["a", "b", "c", "d", "e"]):
        trees = shapes_to_trees(labels)
        for h in (1, 2):
            for net in network_levels(labels, h, "temporal_tree_child")[h]:
                cen = network_census(net)
                rigid = cen.rigid_pairs()
                weak = sorted(cen.weak, key=repr)
                parents = {p for r in net.reticulations for p in net.parents[r]}
                for s1, s2 in itertools.combinations(weak, 2):
                    if (s1, s2) in rigid:
                        continue
                    t1, t2 = trees[s1], trees[s2]
                    for m1, m2, g in map_pairs(t1, t2, net):
                        off = [g[v] for v in net.vertices if v != net.root]
                        if min(off) >= 2 and max(off) <= 3 and any(g[p] == 3 for p in parents):
                            return {"t": t1.newick(), "t_prime": t2.newick(), "network": serialize(net)}
    return None


def fig5():
    t = PhyloTree.from_nested((("x1", "x2"), ((("x3", "x5"), "x4"), "y")))
    tp = PhyloTree.from_nested(((("x1", ("x4", "x5")), "x2"), ("x3", "y")))
    seq = ForkPickingSequence((ForkOp(2, "x5"), ForkOp(2, "x3"), ForkOp(1, "x4"),
                               ForkOp(0, "x1"), ForkOp(0, "x2")))
    assert check_fork_picking_sequence(t, tp, seq)
    assert cherry_counts(t, tp, ("x5", "x3", "x4", "x2", "x1")) == (1, 1, 1, 0, 0)
    assert min_weight_fork_picking(t, tp).optimum == 1
    trace = build_network(t, tp, seq)
    return {"t": t.newick(), "t_prime": tp.newick(), "network": serialize(trace.network),
            "sequence": [str(op) for op in seq.ops]}


def weak_level1_pairs(labels):
    """Ordered shape pairs weakly displayed by some one-reticulation network."""
    pairs = set()
    trees = [PhyloNetwork.from_tree(t) for t in enumerate_trees(labels)]
    seen = set()
    for tree in trees:
        for net in insertions(tree):
            key = canonical_form(net)
            if key in seen:
                continue
            seen.add(key)
            weak = list(network_census(net).weak)
            pairs.update(itertools.product(weak, weak))
    return pairs


def fig6():
    labels = ["a", "b", "c", "d", "e"]
    trees = list(enumerate_trees(labels))
    weak1 = weak_level1_pairs(labels)
    displayed1 = set()
    for net in network_levels(labels, 1, "general")[1]:
        forms = displayed_tree_forms(net)
        displayed1.update(itertools.product(forms, forms))
    for t1, t2 in itertools.product(trees, trees):
        if (t1.nested(), t2.nested()) not in weak1:
            continue
        if min_weight_fork_picking(t1, t2).optimum != 2:
            continue
        if min_weight_cherry_picking(t1, t2).optimum != 2:
            continue
        if (canonical_form(t1), canonical_form(t2)) in displayed1:
            continue
        res = min_weight_fork_picking(t1, t2)
        trace = build_network(t1, t2, res.witness)
        return {"t": t1.newick(), "t_prime": t2.newick(), "network": serialize(trace.network),
                "sequence": [str(op) for op in res.witness.ops]}
    return None


def fig2():
    labels = [str(i) for i in range(1, 7)]
    trees = list(enumerate_trees(labels))
    ts = [t for t in trees
          if cherries(t) == {frozenset("13"), frozenset("46")}
          and frozenset("135") in set(pendant_subtrees(t).values())]
    cands = []
    for t in ts:
        own = {c for c in pendant_subtrees(t).values() if len(c) >= 2}
        for tp in trees:
            ch = cherries(tp)
            if frozenset("56") not in ch or not any("2" in c for c in ch):
                continue
            if own & {c for c in pendant_subtrees(tp).values() if len(c) >= 2} - {frozenset(labels)}:
                continue
            cands.append((t, tp))
    print(f"fig2: {len(ts)} choices for T, {len(cands)} candidate pairs", file=sys.stderr)
    weak1 = weak_level1_pairs(labels)
    for t, tp in cands:
        if (t.nested(), tp.nested()) in weak1:
            continue
        return {"t": t.newick(), "t_prime": tp.newick()}
    return None


def main(argv):
    which = argv or ["fig1", "fig3", "fig5", "fig6", "fig2"]
    out = {}
    for name in which:
        start = time.perf_counter()
        out[name] = globals()[name]()
        print(f"{name}: {out[name]} ({time.perf_counter() - start:.1f}s)", file=sys.stderr)
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main(sys.argv[1:])
