"""Temporal tree-child networks built from fork-picking sequences.

The sequence is replayed backwards. Starting from the last remaining leaf,
every removed leaf is put back:

* kind 0, and kind 2/3 inside a special block, hang the leaf next to its
  cherry partner in the designated tree (the cherry partner is shared by
  both trees for kind 0);
* the closing kind-1 operation of a block subdivides the pendant edges of
  the leaf's two cherry partners and hangs the leaf below a new
  reticulation joining them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .display import rigidly_displays
from .forkops import ForkOp, ForkPickingSequence, PairState, check_fork_picking_sequence
from .model import InputError, PhyloNetwork, PhyloTree, restrict
from .netcheck import is_tree_child, temporal_labelling, validate


class ConstructionError(RuntimeError):
    """An internal self-check failed; this indicates a bug."""


@dataclass(frozen=True)
class InsertionStep:
    leaf: str
    op: ForkOp
    subdivided: tuple  # labels of the leaves whose pendant edges were subdivided
    reticulation: bool

    def to_json(self) -> dict:
        return {
            "leaf": self.leaf,
            "op": self.op.to_json(),
            "subdivided": list(self.subdivided),
            "reticulation": self.reticulation,
        }


@dataclass
class ConstructionTrace:
    start_leaf: str
    steps: list
    network: PhyloNetwork
    times: dict
    maps: tuple
    t1: PhyloTree = field(repr=False, default=None)
    t2: PhyloTree = field(repr=False, default=None)

    def replay(self) -> PhyloNetwork:
        builder = _Builder(self.start_leaf)
        for step in self.steps:
            builder.apply(step)
        return builder.network()

    def to_json(self) -> dict:
        from .newick import serialize

        return {
            "network": serialize(self.network),
            "h": self.network.h,
            "start_leaf": self.start_leaf,
            "steps": [s.to_json() for s in self.steps],
            "times": {str(v): t for v, t in sorted(self.times.items())},
            "maps": [self.maps[0].to_json(self.t1), self.maps[1].to_json(self.t2)],
        }


class _Builder:
    def __init__(self, first: str):
        self.next_id = 1
        self.edges: set = set()
        self.parent: dict[int, list] = {0: []}
        self.labels = {0: first}
        self.vertex = {first: 0}

    def _new(self) -> int:
        v = self.next_id
        self.next_id += 1
        self.parent[v] = []
        return v

    def _edge(self, u, v):
        self.edges.add((u, v))
        self.parent[v].append(u)

    def _subdivide_above(self, leaf: str) -> int:
        """Put a new vertex directly above ``leaf`` and return it."""
        t = self.vertex[leaf]
        w = self._new()
        parents = self.parent[t]
        for u in parents:
            self.edges.discard((u, t))
            self._edge(u, w)
        self.parent[t] = []
        self._edge(w, t)
        return w

    def _leaf(self, label: str) -> int:
        if label in self.vertex:
            raise ConstructionError(f"leaf {label} inserted twice")
        v = self._new()
        self.labels[v] = label
        self.vertex[label] = v
        return v

    def apply(self, step: InsertionStep):
        for lab in step.subdivided:
            if lab not in self.vertex:
                raise ConstructionError(f"anchor leaf {lab} not present")
        x = self._leaf(step.leaf)
        if step.reticulation:
            up = self._subdivide_above(step.subdivided[0])
            uq = self._subdivide_above(step.subdivided[1])
            r = self._new()
            self._edge(up, r)
            self._edge(uq, r)
            self._edge(r, x)
        else:
            w = self._subdivide_above(step.subdivided[0])
            self._edge(w, x)

    def network(self) -> PhyloNetwork:
        return PhyloNetwork(sorted(self.edges), dict(self.labels))


def _insertion(op: ForkOp, star: int) -> InsertionStep:
    x = op.leaf
    if op.kind == 0:
        return InsertionStep(x, op, (op.w1[1],), False)
    if op.kind == 1:
        first = op.w1[1] if star != 2 else op.w2[1]
        second = op.w2[1] if star != 2 else op.w1[1]
        return InsertionStep(x, op, (first, second), True)
    fork = op.w1 if op.fork_tree == 1 else op.w2
    partner = fork[2] if op.kind == 2 else fork[1]
    return InsertionStep(x, op, (partner,), False)


def plan_insertions(t1: PhyloTree, t2: PhyloTree, seq: ForkPickingSequence) -> tuple[str, list]:
    """The leaf left at the end of ``seq`` and the insertion steps, in replay order."""
    verdict = check_fork_picking_sequence(t1, t2, seq)
    if not verdict:
        raise InputError(f"invalid fork-picking sequence: {verdict.reason}")
    state = PairState(t1, t2)
    # re-detect every operation so that witnesses are complete
    mask = state.full
    ops = []
    for op in seq.ops:
        ops.append(state.match(op, mask))
        mask &= ~(1 << state.index[op.leaf])
    (last,) = state.labels_of(mask)
    steps = []
    for kind, a, b in ForkPickingSequence(tuple(ops)).blocks():
        block = ops[a:b]
        star = next((op.fork_tree for op in block if op.kind >= 2), 1)
        steps.extend(_insertion(op, star) for op in block)
    steps.reverse()
    return last, steps


def _verify(net: PhyloNetwork, t1: PhyloTree, t2: PhyloTree, budget: int):
    report = validate(net)
    if not report.is_valid_network:
        raise ConstructionError(f"not a network: {report.witness}")
    if not is_tree_child(net):
        raise ConstructionError("result is not tree-child")
    times = temporal_labelling(net)
    if times is None:
        raise ConstructionError("result is not temporal")
    if net.h > budget:
        raise ConstructionError(f"{net.h} reticulations exceed the weight {budget}")
    maps = None
    if len(t1.leaves) > 1:
        maps = rigidly_displays(net, t1, t2)
        if maps is None:
            raise ConstructionError("result does not rigidly display the trees")
    return times, maps


def build_network(t1: PhyloTree, t2: PhyloTree, seq: ForkPickingSequence,
                  verify_each_step: bool = True) -> ConstructionTrace:
    """A temporal tree-child network with at most ``seq.weight`` reticulations
    rigidly displaying both trees, together with the insertion trace."""
    start, steps = plan_insertions(t1, t2, seq)
    builder = _Builder(start)
    present = [start]
    used = 0
    for step in steps:
        builder.apply(step)
        present.append(step.leaf)
        used += step.reticulation
        if verify_each_step and len(present) < len(t1.leaves):
            _verify(builder.network(), restrict(t1, present), restrict(t2, present), used)
    net = builder.network()
    times, maps = _verify(net, t1, t2, seq.weight)
    return ConstructionTrace(start, steps, net, times, maps, t1, t2)


def replay_matches(trace: ConstructionTrace) -> bool:
    from .model import networks_isomorphic

    return networks_isomorphic(trace.replay(), trace.network)
