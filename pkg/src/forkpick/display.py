"""Display maps and the weak / ordinary / rigid display predicates.

A display map sends tree vertices to network vertices and every tree edge to
a directed network path. Because the gamma counts depend on the chosen
paths, the searches here work with explicit paths: for every network vertex
we precompute all directed paths leaving it, together with how many times
each *critical* vertex (a reticulation or a parent of one) is entered.
Rigid display then becomes a bottom-up dynamic programme over the tree whose
states are Pareto-minimal count vectors on the critical vertices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .model import InputError, PhyloNetwork, PhyloTree, canonical_form

RIGID_RETIC_BOUND = 3
RIGID_PARENT_BOUND = 2
DEFAULT_MAP_LIMIT = 10_000


class MapLimitExceeded(RuntimeError):
    """Raised when an enumeration would exceed its limit; carries the partial list."""

    def __init__(self, limit: int, partial: list):
        super().__init__(f"more than {limit} display maps")
        self.limit = limit
        self.partial = partial


@dataclass(frozen=True)
class DisplayMap:
    """Vertex images plus an explicit network path for every tree edge."""

    vertex_image: dict
    edge_image: dict  # (tree tail, tree head) -> tuple of network vertices

    def to_json(self, tree: PhyloTree) -> dict:
        def name(v):
            return tree.labels.get(v, str(v))
        return {
            "vertex_image": [[name(t), n] for t, n in sorted(self.vertex_image.items())],
            "edge_image": [[name(a), name(b), list(path)] for (a, b), path in sorted(self.edge_image.items())],
        }


def _require_same_leaves(tree: PhyloTree, net: PhyloNetwork):
    if tree.leaves != net.leaves:
        raise InputError("tree and network have different leaf sets")


# ---------------------------------------------------------------------------
# validation and gamma


def check_display_map(tree: PhyloTree, net: PhyloNetwork, dm: DisplayMap) -> bool:
    """True iff ``dm`` satisfies the three display-map conditions.

    Raises InputError when ``dm`` is malformed (missing images, or a path
    whose endpoints disagree with the vertex images).
    """
    _require_same_leaves(tree, net)
    psi = dm.vertex_image
    if set(psi) != set(tree.postorder):
        raise InputError("display map does not cover every tree vertex")
    for e in tree.edges:
        path = dm.edge_image.get(e)
        if path is None:
            raise InputError(f"no image for tree edge {e}")
        if not path or path[0] != psi[e[0]] or path[-1] != psi[e[1]]:
            raise InputError(f"image of edge {e} has wrong endpoints")
    for v, lab in tree.labels.items():
        if net.labels.get(psi[v]) != lab:
            return False
    edge_set = set(net.edges)
    for t in tree.children:
        n = psi[t]
        if n not in net.children or not (len(net.parents[n]) <= 1 and len(net.children[n]) == 2):
            return False
    for e in tree.edges:
        path = dm.edge_image[e]
        if len(path) < 2:
            return False
        if any((a, b) not in edge_set for a, b in zip(path, path[1:])):
            return False
    for t, (c1, c2) in tree.children.items():
        if dm.edge_image[(t, c1)][1] == dm.edge_image[(t, c2)][1]:
            return False
    return True


def gamma_profile(dm: DisplayMap, net: Optional[PhyloNetwork] = None) -> dict:
    """Number of edge images ending at or passing through each network vertex."""
    gamma = {v: 0 for v in net.vertices} if net is not None else {}
    for path in dm.edge_image.values():
        for w in path[1:]:
            gamma[w] = gamma.get(w, 0) + 1
    return gamma


def pair_gamma(dm1: DisplayMap, dm2: DisplayMap, net: PhyloNetwork) -> dict:
    g1, g2 = gamma_profile(dm1, net), gamma_profile(dm2, net)
    return {v: g1[v] + g2[v] for v in net.vertices}


def rigid_violation(net: PhyloNetwork, gamma: dict) -> Optional[int]:
    """First vertex breaking the rigid bounds, or None."""
    for r in net.reticulations:
        if gamma[r] > RIGID_RETIC_BOUND:
            return r
        for p in net.parents[r]:
            if gamma[p] > RIGID_PARENT_BOUND:
                return p
    return None


# ---------------------------------------------------------------------------
# path tables


class PathTable:
    """All directed paths of a network, grouped by start vertex and first edge.

    Only paths ending at a vertex that may be an image (a leaf, a tree vertex
    or the root) are kept. Each path carries the vector of entries into the
    critical vertices, in the order of ``critical``.
    """

    def __init__(self, net: PhyloNetwork, critical: tuple = ()):
        self.net = net
        self.critical = tuple(critical)
        self.index = {c: i for i, c in enumerate(self.critical)}
        zero = (0,) * len(self.critical)
        self.zero = zero
        # paths from a vertex with length >= 0, as (end, path, vector)
        tails: dict[int, list] = {}
        for v in reversed(net.topological_order):
            own = list(zero)
            if v in self.index:
                own[self.index[v]] = 1
            own = tuple(own)
            items = []
            if self.is_image(v):
                items.append((v, (v,), own))
            for c in net.children[v]:
                for end, path, vec in tails[c]:
                    items.append((end, (v,) + path, _add(own, vec)))
            tails[v] = items
        self.tails = tails

    def is_image(self, v: int) -> bool:
        net = self.net
        if not net.children[v]:
            return v in net.labels
        return len(net.parents[v]) <= 1 and len(net.children[v]) == 2

    def leaving(self, start: int, child: int) -> list:
        """Paths ``start -> child -> ... -> end`` with the start vertex not counted."""
        return [(end, (start,) + path, vec) for end, path, vec in self.tails[child]]


def _add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _leq(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _pareto_insert(front: dict, vec: tuple, info) -> None:
    """Keep ``front`` (vector -> info) an antichain of minimal vectors."""
    for other in front:
        if _leq(other, vec):
            return
    for other in [o for o in front if _leq(vec, o)]:
        del front[other]
    front[vec] = info


def critical_vertices(net: PhyloNetwork) -> tuple:
    crit = set(net.reticulations)
    for r in net.reticulations:
        crit.update(net.parents[r])
    return tuple(sorted(crit))


def rigid_bounds(net: PhyloNetwork, critical: tuple) -> tuple:
    rets = set(net.reticulations)
    return tuple(RIGID_RETIC_BOUND if c in rets else RIGID_PARENT_BOUND for c in critical)


# ---------------------------------------------------------------------------
# the signature dynamic programme


class SignatureDP:
    """Pareto-minimal critical-vertex count vectors for subtrees of a tree.

    ``front[t][n]`` maps each minimal vector achievable by a display map of
    the subtree below tree vertex ``t`` with ``t`` sent to network vertex
    ``n`` to one witness choice, enabling reconstruction of explicit maps.
    """

    def __init__(self, tree: PhyloTree, table: PathTable, bound: Optional[tuple] = None):
        self.tree = tree
        self.table = table
        self.bound = bound
        net = table.net
        image_vertices = [n for n in net.vertices if table.is_image(n) and net.children[n]]
        self.front: dict[int, dict[int, dict]] = {}
        for t in tree.postorder:
            if t not in tree.children:
                n = net.leaf_vertex[tree.labels[t]]
                self.front[t] = {n: {table.zero: None}}
                continue
            c1, c2 = tree.children[t]
            per_n = {}
            for n in image_vertices:
                n1, n2 = net.children[n]
                best: dict = {}
                for a, b in ((n1, n2), (n2, n1)):
                    left = self._extend(c1, n, a)
                    if not left:
                        continue
                    right = self._extend(c2, n, b)
                    for lv, linfo in left.items():
                        for rv, rinfo in right.items():
                            vec = _add(lv, rv)
                            if bound is not None and not _leq(vec, bound):
                                continue
                            _pareto_insert(best, vec, (linfo, rinfo))
                if best:
                    per_n[n] = best
            self.front[t] = per_n

    def _extend(self, child: int, start: int, first: int) -> dict:
        """Pareto front for the edge into ``child`` whose image starts ``start -> first``."""
        out: dict = {}
        fronts = self.front[child]
        bound = self.bound
        for end, path, pvec in self.table.leaving(start, first):
            sub = fronts.get(end)
            if not sub:
                continue
            for svec in sub:
                vec = _add(pvec, svec)
                if bound is not None and not _leq(vec, bound):
                    continue
                _pareto_insert(out, vec, (child, path, svec))
        return out

    def root_front(self) -> dict:
        """Minimal vectors over all images of the tree root: vector -> image."""
        out: dict = {}
        for n, fr in self.front[self.tree.root].items():
            for vec in fr:
                _pareto_insert(out, vec, n)
        return out

    def reconstruct(self, root_image: int, vec: tuple) -> DisplayMap:
        psi = {}
        paths = {}
        stack = [(self.tree.root, root_image, vec)]
        while stack:
            t, n, v = stack.pop()
            psi[t] = n
            info = self.front[t][n][v]
            if info is None:
                continue
            for child, path, svec in info:
                paths[(t, child)] = path
                stack.append((child, path[-1], svec))
        return DisplayMap(psi, paths)


def _single_leaf_map(tree: PhyloTree, net: PhyloNetwork) -> Optional[DisplayMap]:
    n = net.leaf_vertex.get(tree.labels[tree.root])
    return None if n is None else DisplayMap({tree.root: n}, {})


# ---------------------------------------------------------------------------
# weak display


def weak_feasibility(tree: PhyloTree, net: PhyloNetwork) -> dict:
    """For every tree vertex, the bitmask of network vertices that can be its image.

    Paths are unconstrained in a plain display map, so reachability suffices.
    """
    pos = {v: i for i, v in enumerate(net.vertices)}
    reach = {}
    for v in reversed(net.topological_order):
        m = 1 << pos[v]
        for c in net.children[v]:
            m |= reach[c]
        reach[v] = m
    branching = [v for v in net.vertices if len(net.children[v]) == 2 and len(net.parents[v]) <= 1]
    feas = {}
    for t in tree.postorder:
        if t not in tree.children:
            n = net.leaf_vertex.get(tree.labels[t])
            feas[t] = 0 if n is None else 1 << pos[n]
            continue
        f1, f2 = (feas[c] for c in tree.children[t])
        m = 0
        for n in branching:
            a, b = net.children[n]
            if (reach[a] & f1 and reach[b] & f2) or (reach[b] & f1 and reach[a] & f2):
                m |= 1 << pos[n]
        feas[t] = m
    return feas


def weakly_displays(tree: PhyloTree, net: PhyloNetwork) -> bool:
    _require_same_leaves(tree, net)
    return bool(weak_feasibility(tree, net)[tree.root])


def weak_display_map(tree: PhyloTree, net: PhyloNetwork) -> Optional[DisplayMap]:
    """One display map, or None when the tree is not weakly displayed."""
    _require_same_leaves(tree, net)
    if not tree.children:
        return _single_leaf_map(tree, net)
    dp = SignatureDP(tree, PathTable(net))
    front = dp.root_front()
    if not front:
        return None
    (vec, n), = front.items()
    return dp.reconstruct(n, vec)


# ---------------------------------------------------------------------------
# enumeration of explicit maps


def find_display_maps(tree: PhyloTree, net: PhyloNetwork, limit: int = DEFAULT_MAP_LIMIT) -> list:
    """All display maps of ``tree`` in ``net``.

    Raises :class:`MapLimitExceeded` (with the maps found so far) if there are
    more than ``limit``.
    """
    _require_same_leaves(tree, net)
    out = []
    for dm in iter_display_maps(tree, net):
        if len(out) == limit:
            raise MapLimitExceeded(limit, out)
        out.append(dm)
    return out


def iter_display_maps(tree: PhyloTree, net: PhyloNetwork) -> Iterator[DisplayMap]:
    if not tree.children:
        dm = _single_leaf_map(tree, net)
        if dm is not None:
            yield dm
        return
    table = PathTable(net)
    feas = weak_feasibility(tree, net)
    pos = {v: i for i, v in enumerate(net.vertices)}

    def ok(t, n):
        return feas[t] >> pos[n] & 1

    # option lists per (tree vertex, image): (first-child path, second-child path)
    def options(t, n):
        c1, c2 = tree.children[t]
        a, b = net.children[n]
        for x, y in ((a, b), (b, a)):
            p1 = [p for end, p, _ in table.leaving(n, x) if ok(c1, end)]
            p2 = [p for end, p, _ in table.leaving(n, y) if ok(c2, end)]
            for q1 in p1:
                for q2 in p2:
                    yield q1, q2

    # expand tree vertices in preorder; each choice fixes the children's images
    order = list(reversed(tree.postorder))

    def expand(i, psi, paths):
        if i == len(order):
            yield DisplayMap(dict(psi), dict(paths))
            return
        t = order[i]
        if t not in tree.children:
            yield from expand(i + 1, psi, paths)
            return
        c1, c2 = tree.children[t]
        for q1, q2 in options(t, psi[t]):
            psi[c1], psi[c2] = q1[-1], q2[-1]
            paths[(t, c1)], paths[(t, c2)] = q1, q2
            yield from expand(i + 1, psi, paths)
        for key in ((t, c1), (t, c2)):
            paths.pop(key, None)

    for n in net.vertices:
        if ok(tree.root, n):
            yield from expand(0, {tree.root: n}, {})


# ---------------------------------------------------------------------------
# ordinary display


def switchings(net: PhyloNetwork) -> Iterator[PhyloNetwork]:
    """Every choice of one incoming edge per reticulation, cleaned up to a tree."""
    rets = net.reticulations
    for choice in itertools.product((0, 1), repeat=len(rets)):
        drop = {(net.parents[r][1 - k], r) for r, k in zip(rets, choice)}
        yield cleanup(PhyloNetwork([e for e in net.edges if e not in drop], net.labels))


def cleanup(net: PhyloNetwork) -> PhyloNetwork:
    """Remove unlabelled sinks and parallel edges, suppress in1/out1 vertices.

    Also strips unary vertices above the topmost branching vertex. The
    result is a phylogenetic network again (or a single leaf).
    """
    children = {v: list(c) for v, c in net.children.items()}
    parents = {v: list(p) for v, p in net.parents.items()}
    labels = dict(net.labels)
    alive = set(net.vertices)
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            if v not in alive:
                continue
            kids, pars = children[v], parents[v]
            if not kids and v not in labels:
                for p in pars:
                    children[p].remove(v)
                alive.discard(v)
                changed = True
            elif len(kids) == 2 and kids[0] == kids[1]:
                c = kids[0]
                children[v] = [c]
                parents[c].remove(v)
                changed = True
            elif len(kids) == 1 and len(pars) <= 1:
                (c,) = kids
                parents[c].remove(v)
                if pars:
                    (p,) = pars
                    children[p][children[p].index(v)] = c
                    parents[c].append(p)
                alive.discard(v)
                changed = True
    edges = [(u, c) for u in alive for c in children[u]]
    return PhyloNetwork(edges, {v: lab for v, lab in labels.items() if v in alive})


def displayed_tree_forms(net: PhyloNetwork) -> set:
    """Canonical forms of all trees displayed by ``net``."""
    out = set()
    for sub in switchings(net):
        if sub.reticulations:
            continue
        out.add(canonical_form(sub.to_tree()))
    return out


def displays(tree: PhyloTree, net: PhyloNetwork) -> bool:
    """True iff some subgraph of ``net`` is a subdivision of ``tree``."""
    _require_same_leaves(tree, net)
    return canonical_form(tree) in displayed_tree_forms(net)


# ---------------------------------------------------------------------------
# rigid display


def rigidly_displays(net: PhyloNetwork, t1: PhyloTree, t2: PhyloTree) -> Optional[tuple]:
    """A pair of display maps meeting the rigid gamma bounds, or None."""
    _require_same_leaves(t1, net)
    _require_same_leaves(t2, net)
    if not t1.children:
        m1, m2 = _single_leaf_map(t1, net), _single_leaf_map(t2, net)
        return (m1, m2) if m1 and m2 else None
    crit = critical_vertices(net)
    bound = rigid_bounds(net, crit)
    table = PathTable(net, crit)
    dp1 = SignatureDP(t1, table, bound)
    f1 = dp1.root_front()
    if not f1:
        return None
    dp2 = SignatureDP(t2, table, bound)
    f2 = dp2.root_front()
    for v1, n1 in sorted(f1.items()):
        for v2, n2 in sorted(f2.items()):
            if _leq(_add(v1, v2), bound):
                return dp1.reconstruct(n1, v1), dp2.reconstruct(n2, v2)
    return None
