"""Exact minimum-weight sequence solvers and sequence extraction from networks."""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .display import check_display_map, pair_gamma, rigid_violation, rigidly_displays
from .forkops import (CherryPickingSequence, ForkPickingSequence, PairState,
                      check_cherry_picking_sequence, check_fork_picking_sequence)
from .model import InputError, PhyloNetwork, PhyloTree
from .netcheck import is_tree_child, temporal_labelling

INFEASIBLE = "infeasible"
UNKNOWN = "unknown"
DEFAULT_NODE_LIMIT = 2_000_000
MAX_LEAVES = 30


def node_limit_from_env() -> int:
    raw = os.environ.get("FORKPICK_NODE_LIMIT")
    if not raw:
        return DEFAULT_NODE_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"FORKPICK_NODE_LIMIT must be an integer, got {raw!r}") from None
    if value <= 0:
        raise InputError("FORKPICK_NODE_LIMIT must be positive")
    return value


class NodeLimitReached(Exception):
    pass


@dataclass
class SearchStats:
    nodes: int = 0
    memo_hits: int = 0
    elapsed: float = 0.0

    def to_json(self) -> dict:
        return {"nodes": self.nodes, "memo_hits": self.memo_hits, "elapsed": round(self.elapsed, 6)}


@dataclass
class SearchResult:
    optimum: Union[int, str]
    witness: Optional[Union[ForkPickingSequence, CherryPickingSequence]] = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def feasible(self) -> bool:
        return isinstance(self.optimum, int)

    def to_json(self) -> dict:
        return {
            "optimum": self.optimum,
            "witness": self.witness.to_json() if self.witness is not None else None,
            "stats": self.stats.to_json(),
        }


def _check_pair(t1: PhyloTree, t2: PhyloTree):
    if t1.leaves != t2.leaves:
        raise InputError("trees have different leaf sets")
    if len(t1.leaves) < 2:
        raise InputError("need at least two leaves")
    if len(t1.leaves) > MAX_LEAVES:
        raise InputError(f"at most {MAX_LEAVES} leaves are supported")


class _Counter:
    def __init__(self, limit: Optional[int], time_limit: Optional[float] = None):
        self.limit = limit or node_limit_from_env()
        self.deadline = time.perf_counter() + time_limit if time_limit else None
        self.stats = SearchStats()

    def tick(self):
        self.stats.nodes += 1
        if self.stats.nodes > self.limit:
            raise NodeLimitReached
        if self.deadline is not None and self.stats.nodes % 256 == 0 and time.perf_counter() > self.deadline:
            raise NodeLimitReached


# ---------------------------------------------------------------------------
# cherry-picking


def min_weight_cherry_picking(t1: PhyloTree, t2: PhyloTree, node_limit: Optional[int] = None,
                              time_limit: Optional[float] = None) -> SearchResult:
    """Minimum number of count-1 steps over all cherry-picking sequences.

    Memoized over the set of remaining leaves; ties are broken towards the
    smallest leaf label.
    """
    _check_pair(t1, t2)
    start = time.perf_counter()
    state = PairState(t1, t2)
    counter = _Counter(node_limit, time_limit)
    inf = float("inf")
    memo: dict[int, tuple] = {}
    p1, p2 = state.m1.partner, state.m2.partner

    def best(mask: int) -> float:
        if mask & (mask - 1) == 0:
            return 0
        hit = memo.get(mask)
        if hit is not None:
            counter.stats.memo_hits += 1
            return hit[0]
        counter.tick()
        value, choice = inf, -1
        m = mask
        while m:
            low = m & -m
            m ^= low
            i = low.bit_length() - 1
            a = p1(i, mask)
            if a < 0:
                continue
            b = p2(i, mask)
            if b < 0:
                continue
            bit = 1 if a != b else 0
            if bit >= value:
                continue
            sub = best(mask ^ low) + bit
            if sub < value:
                value, choice = sub, i
                if value == 0:
                    break
        memo[mask] = (value, choice)
        return value

    try:
        value = best(state.full)
    except NodeLimitReached:
        counter.stats.elapsed = time.perf_counter() - start
        return SearchResult(UNKNOWN, None, counter.stats)
    counter.stats.elapsed = time.perf_counter() - start
    if value == inf:
        return SearchResult(INFEASIBLE, None, counter.stats)
    order, counts = [], []
    mask = state.full
    while mask & (mask - 1):
        _, i = memo[mask]
        counts.append(int(p1(i, mask) != p2(i, mask)))
        order.append(state.order[i])
        mask ^= 1 << i
    cps = CherryPickingSequence(tuple(order), tuple(counts))
    assert check_cherry_picking_sequence(t1, t2, cps)
    return SearchResult(int(value), cps, counter.stats)


def decide_rigidly_displayable(t1: PhyloTree, t2: PhyloTree) -> bool:
    """True iff some temporal tree-child network rigidly displays both trees."""
    result = min_weight_cherry_picking(t1, t2)
    if result.optimum == UNKNOWN:
        raise NodeLimitReached("node limit reached while deciding feasibility")
    return result.feasible


# ---------------------------------------------------------------------------
# special sequences


def special_sequences(state: PairState, mask: int, lca_tree: str = "restriction",
                      counter: Optional[_Counter] = None) -> dict[int, tuple]:
    """All special sequences from ``T|mask``, as {end mask: first-found ops}.

    Sequences are explored in lexicographic order of (tree holding the forks,
    operations), so the stored witness for every end mask is deterministic.
    """
    size = mask.bit_count()
    out: dict[int, tuple] = {}
    if size < 3:
        return out
    for op in state.ops(mask):
        if op.kind == 1:
            out.setdefault(mask & ~(1 << state.index[op.leaf]), (op,))
    for star in (1, 2):
        mt = state.m1 if star == 1 else state.m2
        region = mask if lca_tree == "restriction" else state.full
        seen = set()
        stack = [(mask, ())]
        while stack:
            cur, prefix = stack.pop()
            if counter is not None:
                counter.tick()
            # prefix + [kind-2/3 op] + [kind-1 op] must leave at least two leaves
            if cur.bit_count() - 2 < 2:
                continue
            nxt = []
            for op in state.ops(cur):
                if op.kind < 2 or op.fork_tree != star:
                    continue
                xi = state.index[op.leaf]
                after = cur & ~(1 << xi)
                if op.kind == 2:
                    fork = op.w1 if star == 1 else op.w2
                    p, _, y = fork
                    yi = state.index[y]
                    final = [f for f in state.ops_at(yi, after) if f.kind == 1]
                    if final and (final[0].w1 if star == 1 else final[0].w2)[1] == p:
                        removed = mask & ~cur
                        clade = mt.lca_cluster((1 << xi) | (1 << yi), region)
                        if removed & ~clade == 0:
                            end = after & ~(1 << yi)
                            out.setdefault(end, prefix + (op, final[0]))
                if (after, star) not in seen:
                    seen.add((after, star))
                    nxt.append((after, prefix + (op,)))
            stack.extend(reversed(nxt))
    return out


# ---------------------------------------------------------------------------
# fork-picking


def min_weight_fork_picking(t1: PhyloTree, t2: PhyloTree, node_limit: Optional[int] = None,
                            eager_kind0: bool = True, lca_tree: str = "restriction",
                            time_limit: Optional[float] = None) -> SearchResult:
    """Minimum weight of a fork-picking sequence (the rigid hybrid number when feasible).

    Dynamic programming over the leaf sets reached at block boundaries. With
    ``eager_kind0`` common cherries are removed greedily before branching
    over special sequences; without it kind-0 operations are branched over
    like everything else.
    """
    _check_pair(t1, t2)
    start = time.perf_counter()
    state = PairState(t1, t2)
    counter = _Counter(node_limit, time_limit)
    inf = float("inf")
    memo: dict[int, tuple] = {}

    def kind0(mask):
        return [op for op in state.ops(mask) if op.kind == 0]

    def best(mask: int) -> float:
        if mask & (mask - 1) == 0:
            return 0
        hit = memo.get(mask)
        if hit is not None:
            counter.stats.memo_hits += 1
            return hit[0]
        counter.tick()
        value, choice = inf, None
        zeros = kind0(mask)
        if zeros and eager_kind0:
            op = zeros[0]
            value = best(mask & ~(1 << state.index[op.leaf]))
            choice = (op,)
        else:
            for op in zeros:
                sub = best(mask & ~(1 << state.index[op.leaf]))
                if sub < value:
                    value, choice = sub, (op,)
            if value > 0:
                for end, ops in sorted(special_sequences(state, mask, lca_tree, counter).items(),
                                       key=lambda kv: [o.leaf for o in kv[1]]):
                    if 1 >= value:
                        break
                    sub = 1 + best(end)
                    if sub < value:
                        value, choice = sub, ops
        memo[mask] = (value, choice)
        return value

    try:
        value = best(state.full)
    except NodeLimitReached:
        counter.stats.elapsed = time.perf_counter() - start
        return SearchResult(UNKNOWN, None, counter.stats)
    counter.stats.elapsed = time.perf_counter() - start
    if value == inf:
        return SearchResult(INFEASIBLE, None, counter.stats)
    ops = []
    mask = state.full
    while mask & (mask - 1):
        _, choice = memo[mask]
        ops.extend(choice)
        for op in choice:
            mask &= ~(1 << state.index[op.leaf])
    seq = ForkPickingSequence(tuple(ops))
    verdict = check_fork_picking_sequence(t1, t2, seq, lca_tree)
    assert verdict, verdict.reason
    assert seq.weight == value
    return SearchResult(int(value), seq, counter.stats)


# ---------------------------------------------------------------------------
# extraction from a network


class ExtractionError(RuntimeError):
    pass


def restrict_network(net: PhyloNetwork, keep) -> PhyloNetwork:
    """Delete the leaves outside ``keep`` and clean up the result."""
    from .display import cleanup

    keep = set(keep)
    drop = [v for v, lab in net.labels.items() if lab not in keep]
    edges = [(u, v) for u, v in net.edges if v not in drop]
    labels = {v: lab for v, lab in net.labels.items() if lab in keep}
    return cleanup(PhyloNetwork(edges, labels))


def _check_witnesses(net, t1, t2, witnesses):
    dm1, dm2 = witnesses
    if not (check_display_map(t1, net, dm1) and check_display_map(t2, net, dm2)):
        raise InputError("witness maps are not display maps")
    if rigid_violation(net, pair_gamma(dm1, dm2, net)) is not None:
        raise InputError("witness maps violate the rigid bounds")


def extract_fork_picking(net: PhyloNetwork, t1: PhyloTree, t2: PhyloTree,
                         witnesses: Optional[tuple] = None) -> ForkPickingSequence:
    """A fork-picking sequence of weight at most h(net).

    Follows the inductive argument: exhaust common cherries, then peel a
    special sequence below a reticulation of maximum time, delete that part
    of the network and recurse. When the leaves below the latest reticulation
    do not form the removed set of any special sequence, every special
    sequence whose restricted network loses a reticulation and still rigidly
    displays the restricted trees is tried instead.
    """
    _check_pair(t1, t2)
    if net.leaves != t1.leaves:
        raise InputError("network and trees have different leaf sets")
    if not is_tree_child(net) or temporal_labelling(net) is None:
        raise InputError("extraction needs a temporal tree-child network")
    if witnesses is None:
        witnesses = rigidly_displays(net, t1, t2)
        if witnesses is None:
            raise InputError("the network does not rigidly display the trees")
    else:
        _check_witnesses(net, t1, t2, witnesses)
    state = PairState(t1, t2)
    ops = _extract(state, net, state.full)
    if ops is None:
        raise ExtractionError("no special sequence reduces the network")
    seq = ForkPickingSequence(tuple(ops))
    verdict = check_fork_picking_sequence(t1, t2, seq)
    if not verdict:
        raise ExtractionError(f"extracted sequence is invalid: {verdict.reason}")
    if seq.weight > net.h:
        raise ExtractionError("extracted sequence is heavier than the network")
    return seq


def _restricted_trees(state: PairState, mask: int):
    from .model import restrict

    keep = state.labels_of(mask)
    return restrict(state.t1, keep), restrict(state.t2, keep)


def _extract(state: PairState, net: PhyloNetwork, mask: int) -> Optional[list]:
    ops = []
    while mask & (mask - 1):
        zeros = [op for op in state.ops(mask) if op.kind == 0]
        if not zeros:
            break
        ops.append(zeros[0])
        mask &= ~(1 << state.index[zeros[0].leaf])
    if mask & (mask - 1) == 0:
        return ops
    net = restrict_network(net, state.labels_of(mask))
    if not net.reticulations:
        return None
    candidates = special_sequences(state, mask)
    preferred = []
    times = temporal_labelling(net)
    if times is not None:
        latest = max(net.reticulations, key=lambda r: (times[r], r))
        below = {net.labels[v] for v in net.descendants[latest] if v in net.labels}
        target = mask & ~state.mask_of(below)
        if target in candidates:
            preferred.append(target)
    rest = sorted(e for e in candidates if e not in preferred)
    for end in preferred + rest:
        sub = restrict_network(net, state.labels_of(end))
        if sub.h >= net.h:
            continue
        tt1, tt2 = _restricted_trees(state, end)
        if len(tt1.leaves) > 1 and rigidly_displays(sub, tt1, tt2) is None:
            continue
        tail = _extract(state, sub, end)
        if tail is not None:
            return ops + list(candidates[end]) + tail
    return None
