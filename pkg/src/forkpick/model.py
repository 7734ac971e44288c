"""Rooted binary phylogenetic trees and networks.

Both classes are immutable after construction. Vertex identifiers are opaque
integers; all meaning lives in leaf labels and vertex degrees.
"""
from __future__ import annotations

import re
from collections import defaultdict
from functools import cached_property
from typing import Iterable, Mapping, Union

LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")

Nested = Union[str, tuple]


class InputError(ValueError):
    """Raised when an operation receives arguments violating its preconditions."""


def check_label(label: str) -> str:
    if not isinstance(label, str) or not LABEL_RE.match(label):
        raise InputError(f"invalid leaf label {label!r}")
    return label


class PhyloTree:
    """A rooted binary leaf-labelled tree.

    ``children`` maps each internal vertex to an ordered pair of children and
    ``labels`` maps each leaf vertex to its label. A single-leaf tree (root is
    the leaf) is representable; it is what remains after removing all but one
    leaf.
    """

    __slots__ = ("root", "children", "labels", "__dict__")

    def __init__(self, root: int, children: Mapping[int, tuple], labels: Mapping[int, str]):
        self.root = root
        self.children = dict(children)
        self.labels = dict(labels)
        self._check()

    def _check(self):
        seen = set()
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v in seen:
                raise InputError("tree contains a cycle or shared vertex")
            seen.add(v)
            if v in self.children:
                kids = self.children[v]
                if len(kids) != 2:
                    raise InputError(f"vertex {v} has {len(kids)} children; trees must be binary")
                stack.extend(kids)
            elif v not in self.labels:
                raise InputError(f"leaf vertex {v} has no label")
            else:
                check_label(self.labels[v])
        if seen != set(self.children) | set(self.labels):
            raise InputError("tree is not connected")
        if len(set(self.labels.values())) != len(self.labels):
            raise InputError("duplicate leaf label")

    # construction helpers -------------------------------------------------

    @classmethod
    def from_nested(cls, nested: Nested) -> "PhyloTree":
        """Build from nested 2-tuples of labels, e.g. ``(("a", "b"), "c")``."""
        children: dict[int, tuple] = {}
        labels: dict[int, str] = {}
        counter = [0]

        def build(node):
            v = counter[0]
            counter[0] += 1
            if isinstance(node, str):
                labels[v] = node
            else:
                if len(node) != 2:
                    raise InputError("non-binary vertex in nested tree")
                children[v] = (build(node[0]), build(node[1]))
            return v

        root = build(nested)
        return cls(root, children, labels)

    # derived structure ----------------------------------------------------

    @cached_property
    def parent(self) -> dict[int, int]:
        return {c: v for v, kids in self.children.items() for c in kids}

    @cached_property
    def leaf_vertex(self) -> dict[str, int]:
        return {lab: v for v, lab in self.labels.items()}

    @cached_property
    def leaves(self) -> frozenset:
        return frozenset(self.labels.values())

    @property
    def vertices(self) -> list[int]:
        return self.postorder

    @cached_property
    def postorder(self) -> list[int]:
        out = []
        stack = [(self.root, False)]
        while stack:
            v, done = stack.pop()
            if done or v not in self.children:
                out.append(v)
            else:
                stack.append((v, True))
                stack.extend((c, False) for c in reversed(self.children[v]))
        return out

    @cached_property
    def cluster(self) -> dict[int, frozenset]:
        cl = {}
        for v in self.postorder:
            if v in self.children:
                a, b = self.children[v]
                cl[v] = cl[a] | cl[b]
            else:
                cl[v] = frozenset([self.labels[v]])
        return cl

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(v, c) for v in self.postorder if v in self.children for c in self.children[v]]

    def is_leaf(self, v: int) -> bool:
        return v not in self.children

    def nested(self) -> Nested:
        """Canonical nested form: children ordered by smallest descendant label."""
        memo = {}
        for v in self.postorder:
            if v in self.children:
                a, b = (memo[c] for c in self.children[v])
                ka, kb = _min_label(a), _min_label(b)
                memo[v] = (a, b) if ka <= kb else (b, a)
            else:
                memo[v] = self.labels[v]
        return memo[self.root]

    def newick(self) -> str:
        return _nested_text(self.nested()) + ";"

    def __repr__(self):
        return f"PhyloTree({self.newick()!r})"

    def __eq__(self, other):
        return isinstance(other, PhyloTree) and self.nested() == other.nested()

    def __hash__(self):
        return hash(self.nested())


def _min_label(node: Nested) -> str:
    while not isinstance(node, str):
        node = node[0]
    return node


def _nested_text(node: Nested) -> str:
    if isinstance(node, str):
        return node
    return "(" + ",".join(_nested_text(c) for c in node) + ")"


def _leaf_set(tree: PhyloTree, leaves: Iterable[str]) -> frozenset:
    ys = frozenset(leaves)
    unknown = ys - tree.leaves
    if unknown:
        raise InputError(f"unknown leaf labels: {sorted(unknown)}")
    return ys


def lca(tree: PhyloTree, leaves: Iterable[str]) -> int:
    """Vertex of ``tree`` that is the last common ancestor of ``leaves``."""
    ys = _leaf_set(tree, leaves)
    if not ys:
        raise InputError("lca of an empty leaf set")
    v = tree.leaf_vertex[next(iter(ys))]
    while not ys <= tree.cluster[v]:
        v = tree.parent[v]
    return v


def restrict(tree: PhyloTree, leaves: Iterable[str]) -> PhyloTree:
    """The restriction ``T|_Y``; degree-2 vertices are suppressed."""
    ys = _leaf_set(tree, leaves)
    if not ys:
        raise InputError("cannot restrict to an empty leaf set")
    memo = {}
    for v in tree.postorder:
        if v in tree.children:
            parts = [memo[c] for c in tree.children[v] if memo[c] is not None]
            memo[v] = None if not parts else parts[0] if len(parts) == 1 else tuple(parts)
        else:
            memo[v] = tree.labels[v] if tree.labels[v] in ys else None
    return PhyloTree.from_nested(memo[tree.root])


def isomorphic(t1: PhyloTree, t2: PhyloTree) -> bool:
    if t1.leaves != t2.leaves:
        raise InputError("trees have different leaf sets")
    return t1.nested() == t2.nested()


def cherries(tree: PhyloTree) -> set[frozenset]:
    out = set()
    for v, (a, b) in tree.children.items():
        if a in tree.labels and b in tree.labels:
            out.add(frozenset((tree.labels[a], tree.labels[b])))
    return out


def pendant_subtrees(tree: PhyloTree) -> dict[int, frozenset]:
    """Leaf sets of the pendant subtrees (clusters of internal non-root vertices)."""
    return {v: tree.cluster[v] for v in tree.children if v != tree.root}


# ---------------------------------------------------------------------------
# networks


ROLE_ROOT, ROLE_TREE, ROLE_RETIC, ROLE_LEAF = "root", "tree", "reticulation", "leaf"


class PhyloNetwork:
    """A rooted directed graph meant to be a binary phylogenetic network.

    Construction does not enforce the degree invariants; use
    :func:`forkpick.netcheck.validate` for that. Leaves are the labelled
    vertices of outdegree zero.
    """

    __slots__ = ("edges", "labels", "__dict__")

    def __init__(self, edges: Iterable[tuple[int, int]], labels: Mapping[int, str]):
        self.edges = tuple(sorted(set(edges)))
        self.labels = dict(labels)
        for lab in self.labels.values():
            check_label(lab)
        if len(set(self.labels.values())) != len(self.labels):
            raise InputError("duplicate leaf label")

    @classmethod
    def from_tree(cls, tree: PhyloTree) -> "PhyloNetwork":
        if not tree.children:
            return cls([], tree.labels)
        return cls(tree.edges, tree.labels)

    @cached_property
    def vertices(self) -> tuple:
        vs = set(self.labels)
        for u, v in self.edges:
            vs.add(u)
            vs.add(v)
        return tuple(sorted(vs))

    @cached_property
    def children(self) -> dict[int, tuple]:
        ch = defaultdict(list)
        for u, v in self.edges:
            ch[u].append(v)
        return {v: tuple(ch.get(v, ())) for v in self.vertices}

    @cached_property
    def parents(self) -> dict[int, tuple]:
        pa = defaultdict(list)
        for u, v in self.edges:
            pa[v].append(u)
        return {v: tuple(pa.get(v, ())) for v in self.vertices}

    @cached_property
    def roots(self) -> tuple:
        return tuple(v for v in self.vertices if not self.parents[v])

    @property
    def root(self) -> int:
        if len(self.roots) != 1:
            raise InputError(f"network has {len(self.roots)} roots")
        return self.roots[0]

    def role(self, v: int) -> str:
        if not self.parents[v]:
            return ROLE_ROOT
        if not self.children[v]:
            return ROLE_LEAF
        if len(self.parents[v]) >= 2:
            return ROLE_RETIC
        return ROLE_TREE

    @cached_property
    def reticulations(self) -> tuple:
        return tuple(v for v in self.vertices if len(self.parents[v]) >= 2)

    @property
    def h(self) -> int:
        return len(self.reticulations)

    @cached_property
    def leaf_vertex(self) -> dict[str, int]:
        return {lab: v for v, lab in self.labels.items()}

    @cached_property
    def leaves(self) -> frozenset:
        return frozenset(self.labels.values())

    @cached_property
    def topological_order(self) -> tuple:
        """Parents before children; raises InputError on a cycle."""
        indeg = {v: len(self.parents[v]) for v in self.vertices}
        ready = sorted(v for v, d in indeg.items() if d == 0)
        out = []
        while ready:
            v = ready.pop()
            out.append(v)
            for c in self.children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(out) != len(self.vertices):
            raise InputError("network contains a directed cycle")
        return tuple(out)

    @cached_property
    def descendants(self) -> dict[int, frozenset]:
        desc = {}
        for v in reversed(self.topological_order):
            s = {v}
            for c in self.children[v]:
                s |= desc[c]
            desc[v] = frozenset(s)
        return desc

    def is_tree(self) -> bool:
        return not self.reticulations

    def to_tree(self) -> PhyloTree:
        if self.reticulations:
            raise InputError("network has reticulations")
        return PhyloTree(self.root, {v: c for v, c in self.children.items() if c}, self.labels)

    def relabelled(self) -> "PhyloNetwork":
        """Copy with vertices renumbered 0..n-1 in canonical order."""
        order = canonical_labelling(self)
        pos = {v: i for i, v in enumerate(order)}
        return PhyloNetwork([(pos[u], pos[v]) for u, v in self.edges],
                            {pos[v]: lab for v, lab in self.labels.items()})

    def __repr__(self):
        return f"PhyloNetwork(h={self.h}, leaves={sorted(self.leaves)})"


def pendant_subnetworks(net: PhyloNetwork) -> list[tuple[int, PhyloNetwork, bool]]:
    """All (cut vertex, subnetwork, is_tree) triples.

    A tree vertex v qualifies when deleting its incoming edge separates the
    descendants of v from the rest and the separated part is a phylogenetic
    network with at least two leaves.
    """
    out = []
    for v in net.vertices:
        if net.role(v) != ROLE_TREE or len(net.children[v]) != 2:
            continue
        below = net.descendants[v]
        if any(p not in below for w in below if w != v for p in net.parents[w]):
            continue
        edges = [(a, b) for a, b in net.edges if a in below]
        labels = {w: net.labels[w] for w in below if w in net.labels}
        if len(labels) < 2:
            continue
        sub = PhyloNetwork(edges, labels)
        out.append((v, sub, not sub.reticulations))
    return out


# ---------------------------------------------------------------------------
# canonical forms


def _refine(net: PhyloNetwork, colors: dict) -> dict:
    while True:
        keys = {
            v: (colors[v],
                tuple(sorted(colors[c] for c in net.children[v])),
                tuple(sorted(colors[p] for p in net.parents[v])))
            for v in net.vertices
        }
        ranks = {k: i for i, k in enumerate(sorted(set(keys.values())))}
        new = {v: ranks[keys[v]] for v in net.vertices}
        if len(ranks) == len(set(colors.values())):
            return new
        colors = new


def _certificate(net: PhyloNetwork, colors: dict) -> tuple:
    return (tuple(sorted((colors[u], colors[v]) for u, v in net.edges)),
            tuple(sorted((colors[v], lab) for v, lab in net.labels.items())))


def _canon_search(net: PhyloNetwork, colors: dict):
    colors = _refine(net, colors)
    cells = defaultdict(list)
    for v, c in colors.items():
        cells[c].append(v)
    big = [c for c in sorted(cells) if len(cells[c]) > 1]
    if not big:
        return _certificate(net, colors), colors
    best = None
    for v in sorted(cells[big[0]]):
        trial = {w: 2 * c + (0 if w == v else 1) if c == big[0] else 2 * c for w, c in colors.items()}
        cand = _canon_search(net, trial)
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def canonical_labelling(net: PhyloNetwork) -> list[int]:
    """Vertices listed in an isomorphism-invariant order (identity on leaf labels)."""
    init = {v: (len(net.parents[v]), len(net.children[v]), net.labels.get(v, "")) for v in net.vertices}
    ranks = {k: i for i, k in enumerate(sorted(set(init.values())))}
    _, colors = _canon_search(net, {v: ranks[init[v]] for v in net.vertices})
    return sorted(net.vertices, key=colors.__getitem__)


def canonical_form(obj: Union[PhyloTree, PhyloNetwork]) -> str:
    """Deterministic text; equal for two objects iff they are isomorphic.

    Trees use canonical Newick. Networks use the edge list under a canonical
    vertex numbering.
    """
    if isinstance(obj, PhyloTree):
        return obj.newick()
    if not obj.edges:
        return "N[]" + ",".join(sorted(obj.labels.values()))
    order = canonical_labelling(obj)
    pos = {v: i for i, v in enumerate(order)}
    edges = sorted((pos[u], pos[v]) for u, v in obj.edges)
    leaves = sorted((pos[v], lab) for v, lab in obj.labels.items())
    return ("N" + str(len(order)) + "|"
            + ",".join(f"{i}={lab}" for i, lab in leaves) + "|"
            + ",".join(f"{u}>{v}" for u, v in edges))


def networks_isomorphic(n1: PhyloNetwork, n2: PhyloNetwork) -> bool:
    return canonical_form(n1) == canonical_form(n2)
