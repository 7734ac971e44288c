"""Fork operations and the validators for special, fork-picking and
cherry-picking sequences.

Operation kinds (``x`` is the removed leaf):

* kind 0: both trees have the same cherry ``{x, y}``.
* kind 1: the trees have cherries ``{p, x}`` and ``{q, x}`` with ``p != q``.
* kind 2: one tree has the pendant 3-fork ``(p, (x, y))``, the other the cherry ``{x, p}``.
* kind 3: one tree has the pendant 4-fork ``((x, y), (p, q))``, the other the cherry ``{x, p}``.

Witness tuples: a cherry is ``(x, partner)``; a 3-fork ``(p, x, y)`` reads
``(p, (x, y))``; a 4-fork ``(x, y, p, q)`` reads ``((x, y), (p, q))``.

Internally trees over a fixed leaf order are handled as :class:`MaskTree`
objects so that restrictions are plain bitmasks.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .model import InputError, PhyloTree, restrict

LCA_TREES = ("restriction", "full")

# Whether a kind-3 operation also needs the other tree to pair the fork's
# remaining leaves (cherry {y, q}). Set from the census experiments.
KIND3_NEEDS_SECOND_CHERRY = False


class MaskTree:
    """A tree whose restrictions are addressed by leaf bitmasks."""

    def __init__(self, tree: PhyloTree, order: Sequence[str]):
        self.order = tuple(order)
        index = {lab: i for i, lab in enumerate(self.order)}
        if set(index) != set(tree.leaves):
            raise InputError("leaf order does not match the tree")
        self.n = len(self.order)
        cl = {}
        for v in tree.postorder:
            if v in tree.children:
                a, b = tree.children[v]
                cl[v] = cl[a] | cl[b]
            else:
                cl[v] = 1 << index[tree.labels[v]]
        self.full = (1 << self.n) - 1
        # per leaf: list of (cluster of the other child, cluster of the ancestor)
        self.up: list[list[tuple[int, int]]] = []
        for i in range(self.n):
            v = tree.leaf_vertex[self.order[i]]
            chain = []
            while v != tree.root:
                p = tree.parent[v]
                a, b = tree.children[p]
                other = b if a == v else a
                chain.append((cl[other], cl[p]))
                v = p
            self.up.append(chain)
        self.clusters = sorted(set(cl.values()))

    def sides(self, i: int, mask: int, count: int = 3) -> list[int]:
        """Restricted sibling clusters met walking up from leaf ``i`` in ``T|mask``.

        The first entry is the sibling cluster of ``i``, the second the sibling
        of their parent, and so on; at most ``count`` entries.
        """
        out = []
        for other, _ in self.up[i]:
            s = other & mask
            if s:
                out.append(s)
                if len(out) == count:
                    break
        return out

    def partner(self, i: int, mask: int) -> int:
        """Index of the leaf forming a cherry with ``i`` in ``T|mask``, or -1."""
        for other, _ in self.up[i]:
            s = other & mask
            if s:
                return s.bit_length() - 1 if s & (s - 1) == 0 else -1
        return -1

    def lca_cluster(self, members: int, mask: int) -> int:
        """Cluster (within ``mask``) of the lca of the leaves in ``members``."""
        i = members.bit_length() - 1
        if members == 1 << i:
            return members
        for _, anc in self.up[i]:
            if anc & members == members:
                return anc & mask
        raise InputError("leaves not in tree")


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True, order=True)
class ForkOp:
    kind: int
    leaf: str
    fork_tree: int = 0  # 1 or 2 for kinds 2 and 3: which tree holds the fork
    w1: tuple = field(default=(), compare=False)
    w2: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        d = {"kind": self.kind, "leaf": self.leaf, "w1": list(self.w1), "w2": list(self.w2)}
        if self.fork_tree:
            d["fork_tree"] = self.fork_tree
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ForkOp":
        try:
            kind = int(d["kind"])
            leaf = str(d["leaf"])
        except (KeyError, TypeError, ValueError):
            raise InputError(f"malformed operation {d!r}") from None
        if kind not in (0, 1, 2, 3):
            raise InputError(f"unknown operation kind {kind}")
        fork_tree = int(d.get("fork_tree", 0))
        if kind >= 2 and fork_tree not in (1, 2):
            fork_tree = _infer_fork_tree(kind, d)
        return cls(kind, leaf, fork_tree if kind >= 2 else 0,
                   tuple(map(str, d.get("w1", ()))), tuple(map(str, d.get("w2", ()))))

    def __str__(self):
        return f"o{self.kind}({self.leaf})"

    @classmethod
    def parse(cls, text: str) -> "ForkOp":
        """Read the short form ``oK(leaf)``; kinds 2 and 3 may carry a tree
        suffix, as in ``o2(x)@1``."""
        m = _OP_TEXT.fullmatch(text.strip())
        if m is None:
            raise InputError(f"cannot read operation {text!r}")
        kind, leaf, tree = int(m[1]), m[2], int(m[3] or 0)
        if kind < 2 and tree:
            raise InputError(f"only kinds 2 and 3 name a tree: {text!r}")
        return cls(kind, leaf, tree)


_OP_TEXT = re.compile(r"o([0-3])\(([A-Za-z0-9_]+)\)(?:@([12]))?")


def _infer_fork_tree(kind: int, d: dict) -> int:
    size = 3 if kind == 2 else 4
    if len(d.get("w1", ())) == size:
        return 1
    if len(d.get("w2", ())) == size:
        return 2
    if d.get("w1") or d.get("w2"):
        raise InputError("cannot tell which tree holds the fork")
    return 0  # left open; validators try both trees


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


OK = Verdict(True)


# ---------------------------------------------------------------------------
# operation detection on masks


def _fork_op(kind: int, x: str, which: int, fork: tuple, cherry: tuple) -> ForkOp:
    if which == 1:
        return ForkOp(kind, x, 1, fork, cherry)
    return ForkOp(kind, x, 2, cherry, fork)


class PairState:
    """Two mask trees over one leaf order, for detecting operations on restrictions."""

    def __init__(self, t1: PhyloTree, t2: PhyloTree):
        if t1.leaves != t2.leaves:
            raise InputError("trees have different leaf sets")
        self.order = tuple(sorted(t1.leaves))
        self.t1, self.t2 = t1, t2
        self.m1 = MaskTree(t1, self.order)
        self.m2 = MaskTree(t2, self.order)
        self.full = self.m1.full
        self.index = {lab: i for i, lab in enumerate(self.order)}

    def mask_of(self, labels: Iterable[str]) -> int:
        m = 0
        for lab in labels:
            m |= 1 << self.index[lab]
        return m

    def labels_of(self, mask: int) -> list[str]:
        return [self.order[i] for i in _bits(mask)]

    def ops_at(self, i: int, mask: int) -> list[ForkOp]:
        """Every operation removing leaf ``i`` from the restrictions to ``mask``."""
        name = self.order
        a = self.m1.partner(i, mask)
        b = self.m2.partner(i, mask)
        if a < 0 or b < 0:
            return []
        x = name[i]
        if a == b:
            return [ForkOp(0, x, 0, (x, name[a]), (x, name[b]))]
        out = [ForkOp(1, x, 0, (x, name[a]), (x, name[b]))]
        for which, mt, other_partner, other in ((1, self.m1, b, self.m2), (2, self.m2, a, self.m1)):
            sides = mt.sides(i, mask, 3)
            if len(sides) < 3:
                continue  # the fork would be the whole tree, so not pendant
            y = sides[0]
            if y & (y - 1):
                continue
            yi = y.bit_length() - 1
            s2 = sides[1]
            cnt = s2.bit_count()
            if cnt == 1:
                p = s2.bit_length() - 1
                if other_partner == p:
                    out.append(_fork_op(2, x, which, (name[p], x, name[yi]), (x, name[p])))
            elif cnt == 2 and s2 >> other_partner & 1:
                p = other_partner
                q = (s2 ^ (1 << p)).bit_length() - 1
                if KIND3_NEEDS_SECOND_CHERRY and other.partner(yi, mask) != q:
                    continue
                out.append(_fork_op(3, x, which, (x, name[yi], name[p], name[q]), (x, name[p])))
        return out

    def ops(self, mask: int) -> list[ForkOp]:
        out = []
        if mask & (mask - 1) == 0:
            return out
        for i in _bits(mask):
            out.extend(self.ops_at(i, mask))
        out.sort()
        return out

    def match(self, op: ForkOp, mask: int) -> Optional[ForkOp]:
        """The detected operation equal to ``op`` on ``T|mask``, or None."""
        i = self.index.get(op.leaf)
        if i is None or not mask >> i & 1:
            return None
        for cand in self.ops_at(i, mask):
            if cand.kind == op.kind and op.fork_tree in (0, cand.fork_tree):
                if (op.w1 and tuple(op.w1) != cand.w1) or (op.w2 and tuple(op.w2) != cand.w2):
                    return None
                return cand
        return None


# ---------------------------------------------------------------------------
# public API on trees


def applicable_ops(t1: PhyloTree, t2: PhyloTree) -> list[ForkOp]:
    """All operations applicable to the pair, sorted by (kind, leaf)."""
    state = PairState(t1, t2)
    if state.full & (state.full - 1) == 0:
        raise InputError("operations need at least two leaves")
    return state.ops(state.full)


def apply_op(t1: PhyloTree, t2: PhyloTree, op: ForkOp) -> tuple[PhyloTree, PhyloTree]:
    state = PairState(t1, t2)
    if state.match(op, state.full) is None:
        raise InputError(f"{op} is not applicable: {_pattern_name(op)} not present")
    keep = t1.leaves - {op.leaf}
    return restrict(t1, keep), restrict(t2, keep)


def _pattern_name(op: ForkOp) -> str:
    return {
        0: "common cherry",
        1: "two different cherries",
        2: "pendant 3-fork with matching cherry",
        3: "pendant 4-fork with matching cherry",
    }[op.kind]


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class ForkPickingSequence:
    ops: tuple

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    @property
    def weight(self) -> int:
        return sum(op.kind == 1 for op in self.ops)

    @property
    def leaves(self) -> list[str]:
        return [op.leaf for op in self.ops]

    def blocks(self) -> list[tuple[str, int, int]]:
        """Decomposition into ("C", start, end) and ("S", start, end) blocks.

        A block ends after each kind-1 operation; within it the leading kind-0
        operations form the C block and the rest the S block. Empty C blocks
        are omitted.
        """
        out = []
        start = 0
        for i, op in enumerate(self.ops):
            if op.kind == 1:
                j = start
                while j < i and self.ops[j].kind == 0:
                    j += 1
                if j > start:
                    out.append(("C", start, j))
                out.append(("S", j, i + 1))
                start = i + 1
        if start < len(self.ops):
            out.append(("C", start, len(self.ops)))
        return out

    def to_json(self) -> dict:
        return {
            "ops": [op.to_json() for op in self.ops],
            "blocks": [[k, a, b] for k, a, b in self.blocks()],
            "weight": self.weight,
        }

    @classmethod
    def from_json(cls, d) -> "ForkPickingSequence":
        ops = d["ops"] if isinstance(d, dict) else d
        return cls(tuple(ForkOp.parse(o) if isinstance(o, str) else ForkOp.from_json(o)
                         for o in ops))

    def __str__(self):
        return "(" + ", ".join(map(str, self.ops)) + ")"


@dataclass(frozen=True)
class CherryPickingSequence:
    order: tuple
    counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "counts", tuple(self.counts))

    @property
    def weight(self) -> int:
        return sum(self.counts)

    def to_json(self) -> dict:
        return {"order": list(self.order), "counts": list(self.counts), "weight": self.weight}

    @classmethod
    def from_json(cls, d: dict) -> "CherryPickingSequence":
        order = tuple(map(str, d["order"]))
        counts = tuple(int(c) for c in d.get("counts", ()))
        return cls(order, counts)


def _special_on_mask(state: PairState, mask: int, ops: Sequence[ForkOp],
                     lca_tree: str = "restriction") -> tuple[Verdict, int]:
    """Validate a special sequence on ``T|mask``; returns the verdict and the final mask.

    Kind-2/3 operations without a designated tree are tried with each tree.
    """
    if lca_tree not in LCA_TREES:
        raise InputError(f"lca_tree must be one of {LCA_TREES}")
    if any(op.kind >= 2 and op.fork_tree == 0 for op in ops):
        first = None
        for star in (1, 2):
            fixed = [replace(op, fork_tree=star) if op.kind >= 2 and op.fork_tree == 0 else op
                     for op in ops]
            result = _special_on_mask(state, mask, fixed, lca_tree)
            if result[0]:
                return result
            first = first or result
        return first
    size = mask.bit_count()
    l = len(ops)
    if size < 3:
        return Verdict(False, "special sequences need at least three leaves"), mask
    if not 1 <= l <= size - 2:
        return Verdict(False, f"length {l} outside 1..{size - 2}"), mask
    start = mask
    star = 0
    cur = mask
    for k, op in enumerate(ops):
        last = k == l - 1
        if last:
            if op.kind != 1:
                return Verdict(False, f"last operation {op} is not of kind 1"), cur
        else:
            if op.kind not in (2, 3):
                return Verdict(False, f"property (i): {op} is not of kind 2 or 3"), cur
            if star == 0:
                star = op.fork_tree
            elif op.fork_tree != star:
                return Verdict(False, f"property (i): {op} uses a fork in the other tree"), cur
        found = state.match(op, cur)
        if found is None:
            return Verdict(False, f"{op} not applicable at step {k + 1}"), cur
        cur &= ~(1 << state.index[op.leaf])
    if l == 1:
        return OK, cur
    prev, final = ops[-2], ops[-1]
    prev = state.match(prev, _mask_before(state, start, ops, l - 2))
    final = state.match(final, _mask_before(state, start, ops, l - 1))
    if prev.kind != 2:
        return Verdict(False, "property (ii): last-but-one operation is not of kind 2"), cur
    fork = prev.w1 if prev.fork_tree == 1 else prev.w2
    p, _, y = fork
    if y != final.leaf:
        return Verdict(False, "property (ii): 3-fork does not pair the last two leaves"), cur
    star_cherry = final.w1 if star == 1 else final.w2
    if star_cherry[1] != p:
        return Verdict(False, "property (ii): kind-1 cherry does not use the 3-fork's outer leaf"), cur
    if l > 2:
        mt = state.m1 if star == 1 else state.m2
        pair = state.mask_of((prev.leaf, final.leaf))
        region = start if lca_tree == "restriction" else state.full
        clade = mt.lca_cluster(pair, region)
        for op in ops[:-2]:
            if not clade >> state.index[op.leaf] & 1:
                return Verdict(False, f"property (iii): {op.leaf} lies outside the clade of "
                                      f"lca({prev.leaf},{final.leaf})"), cur
    return OK, cur


def _mask_before(state: PairState, start: int, ops: Sequence[ForkOp], k: int) -> int:
    m = start
    for op in ops[:k]:
        m &= ~(1 << state.index[op.leaf])
    return m


def check_special_sequence(t1: PhyloTree, t2: PhyloTree, ops: Sequence[ForkOp],
                           lca_tree: str = "restriction") -> Verdict:
    state = PairState(t1, t2)
    if len({op.leaf for op in ops}) != len(ops):
        return Verdict(False, "repeated leaf")
    return _special_on_mask(state, state.full, ops, lca_tree)[0]


def check_fork_picking_sequence(t1: PhyloTree, t2: PhyloTree, seq,
                                lca_tree: str = "restriction") -> Verdict:
    state = PairState(t1, t2)
    ops = tuple(seq.ops if isinstance(seq, ForkPickingSequence) else seq)
    n = len(state.order)
    if n < 2:
        return Verdict(False, "fork-picking sequences need at least two leaves")
    if len(ops) != n - 1:
        return Verdict(False, f"expected {n - 1} operations, got {len(ops)}")
    leaves = [op.leaf for op in ops]
    if len(set(leaves)) != len(leaves) or not set(leaves) <= set(state.order):
        return Verdict(False, "operations must use distinct leaves of the trees")
    blocks = ForkPickingSequence(ops).blocks()
    if blocks[-1][0] != "C":
        return Verdict(False, "the final block of kind-0 operations is empty")
    mask = state.full
    for kind, a, b in blocks:
        if kind == "C":
            for op in ops[a:b]:
                if op.kind != 0 or state.match(op, mask) is None:
                    return Verdict(False, f"{op} is not an applicable kind-0 operation")
                mask &= ~(1 << state.index[op.leaf])
        else:
            verdict, mask = _special_on_mask(state, mask, ops[a:b], lca_tree)
            if not verdict:
                return Verdict(False, f"block at {a}..{b - 1}: {verdict.reason}")
    return OK


def check_cherry_picking_sequence(t1: PhyloTree, t2: PhyloTree, cps: CherryPickingSequence) -> Verdict:
    state = PairState(t1, t2)
    n = len(state.order)
    order = list(cps.order)
    if len(order) != n - 1 or len(set(order)) != len(order) or not set(order) <= set(state.order):
        return Verdict(False, f"order must list {n - 1} distinct leaves")
    if cps.counts and len(cps.counts) != len(order):
        return Verdict(False, "counts and order differ in length")
    mask = state.full
    for k, x in enumerate(order):
        i = state.index[x]
        a, b = state.m1.partner(i, mask), state.m2.partner(i, mask)
        if a < 0 or b < 0:
            which = "first" if a < 0 else "second"
            return Verdict(False, f"step {k + 1}: {x} is in no cherry of the {which} tree")
        bit = int(a != b)
        if cps.counts and cps.counts[k] != bit:
            return Verdict(False, f"step {k + 1}: count should be {bit}")
        mask &= ~(1 << i)
    return OK


def cherry_counts(t1: PhyloTree, t2: PhyloTree, order: Sequence[str]) -> tuple:
    """Recompute the count bits of a cherry-picking order (raises if invalid)."""
    state = PairState(t1, t2)
    mask = state.full
    out = []
    for x in order:
        i = state.index[x]
        a, b = state.m1.partner(i, mask), state.m2.partner(i, mask)
        if a < 0 or b < 0:
            raise InputError(f"{x} is not in a cherry of both trees")
        out.append(int(a != b))
        mask &= ~(1 << i)
    return tuple(out)


def fork_to_cherry(seq: ForkPickingSequence) -> CherryPickingSequence:
    """Every removed leaf sits in a cherry of both trees; kinds 1-3 mean different cherries."""
    return CherryPickingSequence(tuple(op.leaf for op in seq.ops),
                                 tuple(int(op.kind != 0) for op in seq.ops))


def cherry_to_fork(t1: PhyloTree, t2: PhyloTree, cps: CherryPickingSequence) -> ForkPickingSequence:
    verdict = check_cherry_picking_sequence(t1, t2, cps)
    if not verdict:
        raise InputError(f"invalid cherry-picking sequence: {verdict.reason}")
    if cps.counts and cps.counts[-1]:
        raise InputError("a cherry-picking sequence cannot end with count 1")
    state = PairState(t1, t2)
    mask = state.full
    ops = []
    for x in cps.order:
        i = state.index[x]
        cands = [op for op in state.ops_at(i, mask) if op.kind <= 1]
        ops.append(cands[0])
        mask &= ~(1 << i)
    return ForkPickingSequence(tuple(ops))
