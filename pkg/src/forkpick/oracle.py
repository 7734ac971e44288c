"""Brute-force ground truth: tree and network enumeration, exhaustive hybrid
numbers, and the tree family with a large temporal/rigid gap.

Nothing here shares search logic with :mod:`forkpick.search`; the rigid and
weak display tests used by the census are re-implemented as a single
bottom-up pass that handles every tree at once.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Iterator, Optional

from .display import (RIGID_PARENT_BOUND, RIGID_RETIC_BOUND, displayed_tree_forms, displays,
                      rigidly_displays, weak_display_map, weakly_displays)
from .forkops import ForkPickingSequence
from .model import InputError, PhyloNetwork, PhyloTree, canonical_form, check_label
from .netcheck import degree_violation, is_tree_child, temporal_labelling

CLASSES = ("general", "tree_child", "temporal_tree_child")
QUANTITIES = ("h_wd", "h_r", "h_t")
MAX_TREE_LEAVES = 7
MAX_NETWORK_LEAVES = 6
MAX_NETWORK_H = 2


def _labels(X: Iterable[str]) -> list[str]:
    labels = sorted(set(X))
    for lab in labels:
        check_label(lab)
    return labels


# ---------------------------------------------------------------------------
# trees


def enumerate_trees(X: Iterable[str]) -> Iterator[PhyloTree]:
    """Every rooted binary tree on ``X``, once each.

    Leaves are added in sorted order onto every edge or above the root, which
    produces each tree exactly once.
    """
    labels = _labels(X)
    if not 2 <= len(labels) <= MAX_TREE_LEAVES:
        raise InputError(f"tree enumeration needs 2..{MAX_TREE_LEAVES} leaves")
    yield from _tree_stream(labels)


def _tree_stream(labels: list[str]) -> Iterator[PhyloTree]:
    def grow(nested, k):
        if k == len(labels):
            yield nested
            return
        for t in _attach(nested, labels[k]):
            yield from grow(t, k + 1)

    for nested in grow((labels[0], labels[1]), 2):
        yield PhyloTree.from_nested(nested)


def _attach(nested, leaf):
    yield (nested, leaf)
    if isinstance(nested, tuple):
        a, b = nested
        for t in _attach(a, leaf):
            yield (t, b)
        for t in _attach(b, leaf):
            yield (a, t)


def double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


# ---------------------------------------------------------------------------
# networks


def _in_class(net: PhyloNetwork, cls: str) -> bool:
    if cls == "general":
        return True
    if not is_tree_child(net):
        return False
    return cls == "tree_child" or temporal_labelling(net) is not None


def insertions(net: PhyloNetwork) -> Iterator[PhyloNetwork]:
    """All networks obtained by adding one reticulation edge to ``net``.

    The tail subdivides an edge (or sits above the root), the head subdivides
    a different edge; cyclic results are skipped.
    """
    yield from _insert(list(net.edges), net.labels, net.root)


def _insert(edges: list, labels: dict, root: int) -> Iterator[PhyloNetwork]:
    """Insertions into an edge list that may contain one doubled edge; only
    results without parallel edges are yielded."""
    top = max(max(e) for e in edges) + 1
    u, v = top, top + 1
    for i in [None] + list(range(len(edges))):
        for j in range(len(edges)):
            if i == j:
                continue
            new = [e for k, e in enumerate(edges) if k != i and k != j]
            if i is None:
                new.append((u, root))
            else:
                a, b = edges[i]
                new += [(a, u), (u, b)]
            a, b = edges[j]
            new += [(a, v), (v, b), (u, v)]
            if len(set(new)) != len(new):
                continue
            cand = PhyloNetwork(new, labels)
            try:
                cand.topological_order
            except InputError:
                continue
            yield cand


def _beaded(tree: PhyloNetwork) -> Iterator[tuple[list, int]]:
    """A tree with one edge (or a new edge above its root) replaced by a bead:
    a tree vertex joined to a reticulation by two parallel edges.

    Beads are not networks, but one more reticulation edge through a bead
    gives networks that no simple one-reticulation network extends to.
    Yields (edge list, root).
    """
    top = max(tree.vertices) + 1
    u, v = top, top + 1
    yield list(tree.edges) + [(u, v), (u, v), (v, tree.root)], u
    for i, (a, b) in enumerate(tree.edges):
        rest = [e for k, e in enumerate(tree.edges) if k != i]
        yield rest + [(a, u), (u, v), (u, v), (v, b)], tree.root


def enumerate_networks(X: Iterable[str], h: int, cls: str = "general",
                       check: bool = True) -> Iterator[PhyloNetwork]:
    """One network per isomorphism class with exactly ``h`` reticulations."""
    labels = _labels(X)
    if cls not in CLASSES:
        raise InputError(f"class must be one of {CLASSES}")
    if check and not (1 <= len(labels) <= MAX_NETWORK_LEAVES and 0 <= h <= MAX_NETWORK_H):
        raise InputError(f"network enumeration needs 1..{MAX_NETWORK_LEAVES} leaves and 0 <= h <= {MAX_NETWORK_H}")
    yield from network_levels(labels, h, cls)[h]


def network_levels(labels: list[str], hmax: int, cls: str) -> list[list[PhyloNetwork]]:
    """Networks of the class for every h <= hmax, deduplicated.

    Removing any reticulation edge of a tree-child network (and suppressing
    the two degree-two vertices) gives a tree-child network, temporal if the
    original was, so growing each level from the previous level of the same
    class is complete for those classes. For general networks the deletion
    can leave a doubled edge, so level 2 also grows from beaded trees; general
    levels above 2 are refused. Completeness is cross-checked against
    :func:`brute_force_networks` on tiny leaf sets.
    """
    if cls == "general" and hmax > 2:
        raise InputError("general networks are only enumerated up to h = 2")
    return list(_levels(tuple(labels), hmax, cls))


@lru_cache(maxsize=16)
def _levels(labels: tuple, hmax: int, cls: str) -> tuple:
    if len(labels) == 1:
        base = [PhyloNetwork([], {0: labels[0]})]
        return (tuple(base),) + tuple(() for _ in range(hmax))
    base = [PhyloNetwork.from_tree(t) for t in _tree_stream(list(labels))]
    levels = [tuple(base)]
    for _ in range(hmax):
        seen = {}
        sources = [insertions(net) for net in levels[-1]]
        if cls == "general" and len(levels) == 2:
            sources += [_insert(edges, net.labels, root)
                        for net in levels[0] for edges, root in _beaded(net)]
        for cand in itertools.chain.from_iterable(sources):
            if not _in_class(cand, cls):
                continue
            key = canonical_form(cand)
            if key not in seen:
                seen[key] = cand.relabelled()
        levels.append(tuple(seen[k] for k in sorted(seen)))
    return tuple(levels)


def brute_force_networks(labels: list[str], h: int) -> set[str]:
    """Canonical forms of all general networks on ``labels`` with ``h``
    reticulations, by direct search over parent assignments.

    Vertices are numbered in a topological order: root, then the internal
    vertices (every arrangement of tree vertices and reticulations), then the
    leaves. Each vertex picks its parents among earlier vertices, and the
    out-degree rules are checked at the end. Only feasible for tiny inputs.
    """
    n = len(labels)
    t = n + h - 2
    internal = t + h
    out = set()
    if n == 1 and h == 0:
        return {canonical_form(PhyloNetwork([], {0: labels[0]}))}
    for retic_pos in itertools.combinations(range(1, internal + 1), h):
        kinds = ["root"] + ["ret" if i in retic_pos else "tree" for i in range(1, internal + 1)]
        cap = [2 if k != "ret" else 1 for k in kinds]

        def place(i, used, edges):
            if i == len(kinds):
                yield from place_leaves(0, used, edges)
                return
            need = 2 if kinds[i] == "ret" else 1
            for parents in itertools.combinations(range(i), need):
                if all(used[p] < cap[p] for p in parents):
                    for p in parents:
                        used[p] += 1
                    yield from place(i + 1, used, edges + [(p, i) for p in parents])
                    for p in parents:
                        used[p] -= 1

        def place_leaves(j, used, edges):
            if j == n:
                if all(used[i] == cap[i] for i in range(len(kinds))):
                    yield edges
                return
            leaf = len(kinds) + j
            for p in range(len(kinds)):
                if used[p] < cap[p]:
                    used[p] += 1
                    yield from place_leaves(j + 1, used, edges + [(p, leaf)])
                    used[p] -= 1

        for edges in place(1, [0] * len(kinds), []):
            if len(set(edges)) != len(edges):
                continue
            net = PhyloNetwork(edges, {len(kinds) + j: labels[j] for j in range(n)})
            if degree_violation(net) is None:
                out.add(canonical_form(net))
    return out


# ---------------------------------------------------------------------------
# one-pass display census for a single network


def _vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _pareto(front: dict, key, vec) -> bool:
    """Insert ``vec`` into ``front[key]`` keeping only minimal vectors."""
    cur = front.setdefault(key, [])
    for w in cur:
        if all(x <= y for x, y in zip(w, vec)):
            return False
    cur[:] = [w for w in cur if not all(x <= y for x, y in zip(vec, w))]
    cur.append(vec)
    return True


def _merge(a, b):
    return (a, b) if _first_leaf(a) < _first_leaf(b) else (b, a)


def _first_leaf(node):
    while isinstance(node, tuple):
        node = node[0]
    return node


def _leafset(node) -> frozenset:
    if isinstance(node, tuple):
        return _leafset(node[0]) | _leafset(node[1])
    return frozenset([node])


@dataclass
class NetworkCensus:
    """Trees on the full leaf set that a network weakly, ordinarily and
    rigidly displays, as nested-tuple shapes (children ordered by first leaf)."""

    weak: dict  # shape -> list of minimal gamma vectors over the critical vertices
    bounds: tuple
    displayed: frozenset

    def rigid_pairs(self) -> set:
        """Ordered pairs of shapes (s1, s2) rigidly displayed together."""
        out = set()
        shapes = sorted(self.weak, key=repr)
        for i, s1 in enumerate(shapes):
            for s2 in shapes[i:]:
                if any(all(x + y <= b for x, y, b in zip(v1, v2, self.bounds))
                       for v1 in self.weak[s1] for v2 in self.weak[s2]):
                    out.add((s1, s2))
                    out.add((s2, s1))
        return out


def network_census(net: PhyloNetwork) -> NetworkCensus:
    """Bottom-up enumeration of every (subtree shape, gamma vector) that can be
    weakly displayed with its root mapped to each vertex.

    Gamma is only tracked on reticulations and their parents, with each
    entry capped at its rigid bound plus one (larger values never matter).
    """
    retics = set(net.reticulations)
    crit = sorted(retics | {p for r in retics for p in net.parents[r]})
    pos = {v: i for i, v in enumerate(crit)}
    bounds = tuple(RIGID_RETIC_BOUND if v in retics else RIGID_PARENT_BOUND for v in crit)
    zero = (0,) * len(crit)

    def bump(vec, v):
        i = pos.get(v)
        if i is None:
            return vec
        if vec[i] > bounds[i]:
            return vec
        return vec[:i] + (vec[i] + 1,) + vec[i + 1:]

    # reach[v]: {(shape, vec)} for a path starting at v (inclusive, v counted)
    # and ending at an image vertex w, with the subtree displayed below w.
    at: dict[int, dict] = {}   # shapes rooted exactly at v (v is an image)
    down: dict[int, dict] = {}  # paths entering v then going down to an image
    for v in reversed(net.topological_order):
        here: dict = {}
        kids = net.children[v]
        if v in net.labels:
            here[net.labels[v]] = [zero]
        elif len(kids) == 2:
            a, b = kids
            for sa, va_list in down[a].items():
                la = _leafset(sa)
                for sb, vb_list in down[b].items():
                    if la & _leafset(sb):
                        continue
                    shape = _merge(sa, sb)
                    for va in va_list:
                        for vb in vb_list:
                            _pareto(here, shape, _vec_add(va, vb))
        at[v] = here
        into: dict = {}
        for shape, vecs in here.items():
            for vec in vecs:
                _pareto(into, shape, bump(vec, v))
        for c in kids:
            for shape, vecs in down[c].items():
                for vec in vecs:
                    _pareto(into, shape, bump(vec, v))
        down[v] = into
    full = frozenset(net.labels.values())
    weak: dict = {}
    for v, here in at.items():
        for shape, vecs in here.items():
            if _leafset(shape) == full:
                for vec in vecs:
                    _pareto(weak, shape, vec)
    displayed = frozenset(displayed_tree_forms(net))
    return NetworkCensus(weak, bounds, displayed)


# ---------------------------------------------------------------------------
# hybrid numbers by exhaustive search


def _quantity_class(quantity: str) -> str:
    return "general" if quantity == "h_wd" else "temporal_tree_child"


def _quantity_holds(quantity: str, net: PhyloNetwork, t1: PhyloTree, t2: PhyloTree):
    """Witness maps (or True for h_t) when ``net`` qualifies, else None."""
    if quantity == "h_wd":
        m1 = weak_display_map(t1, net)
        if m1 is None:
            return None
        m2 = weak_display_map(t2, net)
        return None if m2 is None else (m1, m2)
    if quantity == "h_r":
        return rigidly_displays(net, t1, t2)
    forms = displayed_tree_forms(net)
    if canonical_form(t1) in forms and canonical_form(t2) in forms:
        return True
    return None


@dataclass
class HybridCertificate:
    quantity: str
    value: object  # int, or the string "> cap"
    cap: int
    network: Optional[PhyloNetwork] = None
    times: Optional[dict] = None
    maps: Optional[tuple] = None
    t1: Optional[PhyloTree] = None
    t2: Optional[PhyloTree] = None
    examined: int = 0

    @property
    def mode(self) -> str:
        return {"h_wd": "weak", "h_r": "rigid", "h_t": "display"}[self.quantity]

    def verify(self) -> bool:
        """Re-check the witness from scratch with the display predicates."""
        if not isinstance(self.value, int):
            return self.network is None
        net = self.network
        if net is None or net.h != self.value or degree_violation(net) is not None:
            return False
        if self.quantity != "h_wd":
            if not is_tree_child(net) or temporal_labelling(net) is None:
                return False
        if self.quantity == "h_wd":
            return weakly_displays(self.t1, net) and weakly_displays(self.t2, net)
        if self.quantity == "h_t":
            return displays(self.t1, net) and displays(self.t2, net)
        return rigidly_displays(net, self.t1, self.t2) is not None

    def to_json(self) -> dict:
        from .newick import serialize

        out = {"quantity": self.quantity, "value": self.value, "cap": self.cap,
               "mode": self.mode, "examined": self.examined}
        if self.network is not None:
            out["network"] = serialize(self.network)
            out["times"] = {str(v): t for v, t in sorted((self.times or {}).items())}
            if isinstance(self.maps, tuple):
                out["maps"] = [self.maps[0].to_json(self.t1), self.maps[1].to_json(self.t2)]
        return out


def _candidate_stream(labels: list[str], h: int, cls: str, t1: PhyloTree, t2: PhyloTree):
    """Networks of the class with ``h`` reticulations, possibly repeated.

    Temporal tree-child levels are small and come deduplicated from the cache.
    General levels are streamed without deduplication; at level two the
    one-reticulation parents that already weakly display a tree go first,
    since adding an edge never destroys a display map.
    """
    if cls != "general" or h == 0:
        yield from network_levels(labels, h, cls)[h]
        return
    trees = [PhyloNetwork.from_tree(t) for t in _tree_stream(labels)]
    if h == 1:
        for tree in trees:
            yield from insertions(tree)
        return
    if h != 2:
        raise InputError("general networks are only searched up to h = 2")
    level1 = network_levels(labels, 1, cls)[1]
    ranked = sorted(level1, key=lambda n: -(weakly_displays(t1, n) + weakly_displays(t2, n)))
    for net in ranked:
        yield from insertions(net)
    for tree in trees:
        for edges, root in _beaded(tree):
            yield from _insert(edges, tree.labels, root)


def brute_hybrid(t1: PhyloTree, t2: PhyloTree, quantity: str, cap: int) -> HybridCertificate:
    """Smallest h <= cap with a qualifying network, by exhaustive enumeration."""
    if quantity not in QUANTITIES:
        raise InputError(f"quantity must be one of {QUANTITIES}")
    if t1.leaves != t2.leaves:
        raise InputError("trees have different leaf sets")
    labels = sorted(t1.leaves)
    cls = _quantity_class(quantity)
    limit = 2 if quantity == "h_wd" else 3
    if cap < 0 or cap > limit:
        raise InputError(f"cap must be between 0 and {limit} for {quantity}")
    if len(labels) > (6 if quantity == "h_wd" else 5):
        raise InputError("too many leaves for exhaustive search")
    examined = 0
    for h in range(cap + 1):
        for net in _candidate_stream(labels, h, cls, t1, t2):
            examined += 1
            if cls != "general" and not _in_class(net, cls):
                continue
            found = _quantity_holds(quantity, net, t1, t2)
            if found is not None:
                net = net.relabelled()
                maps = _quantity_holds(quantity, net, t1, t2)
                times = temporal_labelling(net)
                cert = HybridCertificate(quantity, h, cap, net, times,
                                         maps if isinstance(maps, tuple) else None, t1, t2, examined)
                if not cert.verify():
                    raise AssertionError("brute-force witness failed re-verification")
                return cert
    return HybridCertificate(quantity, f"> {cap}", cap, t1=t1, t2=t2, examined=examined)


# ---------------------------------------------------------------------------
# census over all pairs


@dataclass
class PairTable:
    """Minimum reticulation numbers per ordered pair of tree shapes, found by
    scanning every temporal tree-child network up to ``hmax`` once."""

    labels: tuple
    hmax: int
    rigid: dict
    display: dict
    networks: int

    def h_r(self, t1: PhyloTree, t2: PhyloTree):
        return self.rigid.get((t1.nested(), t2.nested()))

    def h_t(self, t1: PhyloTree, t2: PhyloTree):
        return self.display.get((t1.nested(), t2.nested()))


def census_table(labels: Iterable[str], hmax: int) -> PairTable:
    labels = _labels(labels)
    rigid: dict = {}
    display: dict = {}
    count = 0
    shape_of = {canonical_form(t): t.nested() for t in _tree_stream(labels)}
    for h, level in enumerate(network_levels(labels, hmax, "temporal_tree_child")):
        for net in level:
            count += 1
            cen = network_census(net)
            for pair in cen.rigid_pairs():
                rigid.setdefault(pair, h)
            shapes = [shape_of[f] for f in cen.displayed]
            for s1 in shapes:
                for s2 in shapes:
                    display.setdefault((s1, s2), h)
    return PairTable(tuple(labels), hmax, rigid, display, count)


# ---------------------------------------------------------------------------
# the family with a large gap between temporal and rigid hybrid numbers


def _balanced(items: list):
    if len(items) == 1:
        return items[0]
    half = len(items) // 2
    return (_balanced(items[:half]), _balanced(items[half:]))


def _block_table(m: int) -> list[list[int]]:
    data = json.loads(resources.files("forkpick.data").joinpath("gap_family.json").read_text())
    if str(m) in data["blocks"]:
        return data["blocks"][str(m)]
    # the interchange rule behind the table: the first subtree takes the odd
    # members of each consecutive pair of blocks, the second the even members
    n = 2 ** m
    odd = [i for i in range(1, n + 1) if i % 2]
    even = [i for i in range(2, n + 1, 2)]
    return [odd[k:k + 4] for k in range(0, len(odd), 4)] + [even[k:k + 4] for k in range(0, len(even), 4)]


@dataclass
class GapFamily:
    m: int
    t: PhyloTree
    t_prime: PhyloTree
    network: PhyloNetwork
    witness: ForkPickingSequence


def gen_theorem_big_trees(m: int) -> tuple[PhyloTree, PhyloTree]:
    """The tree pair on {1, ..., 2^m + 2} with rigid hybrid number 1 and
    temporal hybrid number at least 2^(m-2) - 1."""
    fam = gap_family(m)
    return fam.t, fam.t_prime


def gap_family(m: int) -> GapFamily:
    if not isinstance(m, int) or m < 3:
        raise InputError("m must be an integer >= 3")
    if m > 10:
        raise InputError("m > 10 is not supported")
    n = 2 ** m
    a, b = str(n + 1), str(n + 2)
    t3 = _balanced([str(i) for i in range(1, n + 1)])
    blocks = _block_table(m)
    half = len(blocks) // 2
    t1 = _balanced([_balanced([str(i) for i in blk]) for blk in blocks[:half]])
    t2 = _balanced([_balanced([str(i) for i in blk]) for blk in blocks[half:]])
    t = PhyloTree.from_nested(((t1, a), (t2, b)))
    t_prime = PhyloTree.from_nested(((t3, a), b))
    # one reticulation whose parents carry the two extra leaves, above T3
    lower = PhyloTree.from_nested(t3)
    off = 6
    edges = [(0, 1), (0, 2), (1, 3), (2, 4), (1, 5), (2, 5), (5, off + lower.root)]
    edges += [(off + u, off + v) for u, v in lower.edges]
    labels = {3: a, 4: b}
    labels.update({off + v: lab for v, lab in lower.labels.items()})
    net = PhyloNetwork(edges, labels)
    from .search import extract_fork_picking

    witness = extract_fork_picking(net, t, t_prime)
    return GapFamily(m, t, t_prime, net, witness)
