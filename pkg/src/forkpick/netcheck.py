"""Class predicates for networks and the temporal-labelling decision procedure."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .model import PhyloNetwork


@dataclass(frozen=True)
class ClassReport:
    is_valid_network: bool
    is_tree_child: bool
    has_shortcut: bool
    is_normal: bool
    is_temporal: bool
    witness: Optional[str] = None

    def to_json(self) -> dict:
        return asdict(self)


def degree_violation(net: PhyloNetwork) -> Optional[str]:
    """Describe the first violated network invariant, or None when valid."""
    if not net.vertices:
        return "empty network"
    try:
        net.topological_order
    except ValueError:
        return "directed cycle"
    if len(net.roots) != 1:
        return f"{len(net.roots)} vertices of indegree 0"
    root = net.roots[0]
    if len(net.vertices) == 1:
        return None if root in net.labels else "single unlabelled vertex"
    for v in net.vertices:
        indeg, outdeg = len(net.parents[v]), len(net.children[v])
        if v == root:
            ok = outdeg == 2
        elif outdeg == 0:
            ok = indeg == 1 and v in net.labels
        elif indeg == 1:
            ok = outdeg == 2
        else:
            ok = indeg == 2 and outdeg == 1
        if ok and v in net.labels and outdeg:
            ok = False
        if not ok:
            what = f" (label {net.labels[v]})" if v in net.labels else ""
            return f"vertex {v}{what} has indegree {indeg} and outdegree {outdeg}"
    return None


def is_tree_child(net: PhyloNetwork) -> bool:
    return _tree_child_witness(net) is None


def _tree_child_witness(net: PhyloNetwork) -> Optional[int]:
    for v in net.vertices:
        kids = net.children[v]
        if kids and all(len(net.parents[c]) >= 2 for c in kids):
            return v
    return None


def has_shortcut(net: PhyloNetwork) -> bool:
    return _shortcut_witness(net) is not None


def _shortcut_witness(net: PhyloNetwork) -> Optional[tuple]:
    desc = net.descendants
    for u, v in net.edges:
        if any(w != v and v in desc[w] for w in net.children[u]):
            return (u, v)
    return None


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def temporal_labelling(net: PhyloNetwork) -> Optional[dict[int, int]]:
    """Integer times satisfying the temporal constraints, or None if impossible.

    Each reticulation is merged with its parents; the network is temporal iff
    the tree edges induce an acyclic relation on the merged classes. Times are
    longest-path levels in that quotient DAG.
    """
    uf = _UnionFind(net.vertices)
    for r in net.reticulations:
        for p in net.parents[r]:
            uf.union(r, p)
    succ: dict[int, set] = {uf.find(v): set() for v in net.vertices}
    for u, v in net.edges:
        if len(net.parents[v]) >= 2:
            continue
        a, b = uf.find(u), uf.find(v)
        if a == b:
            return None
        succ[a].add(b)
    indeg = {c: 0 for c in succ}
    for c in succ:
        for d in succ[c]:
            indeg[d] += 1
    level = {c: 0 for c in succ}
    ready = [c for c, d in indeg.items() if d == 0]
    done = 0
    while ready:
        c = ready.pop()
        done += 1
        for d in succ[c]:
            level[d] = max(level[d], level[c] + 1)
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
    if done != len(succ):
        return None
    times = {v: level[uf.find(v)] for v in net.vertices}
    if not check_temporal_labelling(net, times):
        raise AssertionError("temporal labelling failed its own check")
    return times


def check_temporal_labelling(net: PhyloNetwork, times: dict) -> bool:
    for u, v in net.edges:
        if len(net.parents[v]) >= 2:
            if times[u] != times[v]:
                return False
        elif not times[u] < times[v]:
            return False
    return True


def is_temporal(net: PhyloNetwork) -> bool:
    return temporal_labelling(net) is not None


def validate(net: PhyloNetwork) -> ClassReport:
    bad = degree_violation(net)
    if bad is not None:
        return ClassReport(False, False, False, False, False, bad)
    tc = _tree_child_witness(net)
    sc = _shortcut_witness(net)
    temporal = temporal_labelling(net) is not None
    witness = None
    if tc is not None:
        witness = f"vertex {tc} has only reticulation children"
    elif sc is not None:
        witness = f"edge {sc[0]}->{sc[1]} is a shortcut"
    elif not temporal:
        witness = "no temporal labelling exists"
    return ClassReport(True, tc is None, sc is not None, tc is None and sc is None, temporal, witness)
