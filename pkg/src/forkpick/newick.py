"""Newick and extended Newick reading and writing.

Reticulations are written as ``(subtree)#H1`` at one parent and as a bare
``#H1`` at the other. Branch lengths and ``[...]`` comments are skipped on
input and never written.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .model import InputError, PhyloNetwork, PhyloTree
from .netcheck import validate

_LABEL = re.compile(r"[A-Za-z0-9_]+")
_NUMBER = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?")
_TAG = re.compile(r"#H(\d+)")


class ParseError(InputError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass
class _Node:
    offset: int
    children: list = field(default_factory=list)
    label: Optional[str] = None
    tag: Optional[int] = None


class _Reader:
    def __init__(self, text: str, allow_tags: bool):
        self.text = text
        self.pos = 0
        self.allow_tags = allow_tags

    def skip(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c.isspace():
                self.pos += 1
            elif c == "[":
                end = text.find("]", self.pos)
                if end < 0:
                    raise ParseError("unterminated comment", self.pos)
                self.pos = end + 1
            else:
                break

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise ParseError(f"expected {ch!r}, found {found!r}", self.pos)
        self.pos += 1

    def node(self) -> _Node:
        self.skip()
        node = _Node(self.pos)
        if self.peek() == "(":
            self.pos += 1
            node.children.append(self.node())
            while self.peek() == ",":
                self.pos += 1
                node.children.append(self.node())
            self.expect(")")
        self.skip()
        m = _LABEL.match(self.text, self.pos)
        if m:
            node.label = m.group()
            self.pos = m.end()
        if self.peek() == "#":
            m = _TAG.match(self.text, self.pos)
            if not m or int(m.group(1)) < 1:
                raise ParseError("malformed reticulation tag", self.pos)
            if not self.allow_tags:
                raise ParseError("reticulation tag in a tree", self.pos)
            node.tag = int(m.group(1))
            self.pos = m.end()
        if self.peek() == ":":
            self.pos += 1
            self.skip()
            m = _NUMBER.match(self.text, self.pos)
            if not m:
                raise ParseError("malformed branch length", self.pos)
            self.pos = m.end()
        if not node.children and node.label is None and node.tag is None:
            raise ParseError("empty leaf", node.offset)
        return node

    def statement(self) -> _Node:
        root = self.node()
        self.expect(";")
        if self.peek():
            raise ParseError("trailing text after ';'", self.pos)
        return root


def parse_tree(text: str) -> PhyloTree:
    """Parse a rooted binary Newick tree."""
    root = _Reader(text, allow_tags=False).statement()
    children: dict[int, tuple] = {}
    labels: dict[int, str] = {}
    seen: dict[str, int] = {}
    counter = 0
    stack = [(root, None)]
    order = []
    # iterative to cope with deep caterpillars
    while stack:
        node, parent = stack.pop()
        v = counter
        counter += 1
        order.append((v, parent))
        if node.children:
            if len(node.children) != 2:
                raise ParseError(f"non-binary vertex with {len(node.children)} children", node.offset)
            children[v] = []
            for c in reversed(node.children):
                stack.append((c, v))
        else:
            if node.label in seen:
                raise ParseError(f"duplicate leaf label {node.label!r}", node.offset)
            seen[node.label] = v
            labels[v] = node.label
    for v, parent in order:
        if parent is not None:
            children[parent].append(v)
    return PhyloTree(0, {v: tuple(c) for v, c in children.items()}, labels)


def parse_network(text: str, strict: bool = True) -> PhyloNetwork:
    """Parse extended Newick.

    With ``strict`` the result must satisfy every network invariant (degrees,
    single root, acyclicity); otherwise only the structural errors are fatal
    (tag arity, parallel edges, cycles), so that :func:`netcheck.validate` can
    report on malformed but readable input.
    """
    root = _Reader(text, allow_tags=True).statement()
    edges: list[tuple[int, int]] = []
    labels: dict[int, str] = {}
    tag_vertex: dict[int, int] = {}
    tag_uses: dict[int, list] = {}
    tag_content: dict[int, bool] = {}
    counter = 0

    def new_vertex():
        nonlocal counter
        counter += 1
        return counter - 1

    stack = [(root, None)]
    while stack:
        node, parent = stack.pop()
        if node.tag is not None:
            tag_uses.setdefault(node.tag, []).append(node.offset)
            if node.tag not in tag_vertex:
                tag_vertex[node.tag] = new_vertex()
            v = tag_vertex[node.tag]
            if node.children or node.label is not None:
                if tag_content.get(node.tag):
                    raise ParseError(f"reticulation #H{node.tag} has content twice", node.offset)
                tag_content[node.tag] = True
        else:
            v = new_vertex()
        if parent is not None:
            edges.append((parent, v))
        if node.children:
            for c in reversed(node.children):
                stack.append((c, v))
        elif node.label is not None:
            if node.label in labels.values():
                raise ParseError(f"duplicate leaf label {node.label!r}", node.offset)
            labels[v] = node.label
    for tag, uses in sorted(tag_uses.items()):
        if len(uses) != 2:
            raise ParseError(f"reticulation tag #H{tag} used {len(uses)} times", uses[-1])
        if not tag_content.get(tag):
            raise ParseError(f"reticulation #H{tag} has no content", uses[0])
    if len(set(edges)) != len(edges):
        dup = next(e for e in edges if edges.count(e) > 1)
        raise ParseError(f"parallel edges between vertices {dup}", 0)
    if any(u == v for u, v in edges):
        raise ParseError("reticulation is its own parent (cycle)", 0)
    # leaves whose label sits on a vertex that also has children
    heads = {u for u, _ in edges}
    for v, lab in labels.items():
        if v in heads:
            raise ParseError(f"label {lab!r} on a vertex with children", 0)
    net = PhyloNetwork(edges, labels)
    try:
        net.topological_order
    except InputError:
        raise ParseError("network contains a directed cycle", 0) from None
    if strict:
        report = validate(net)
        if not report.is_valid_network:
            raise ParseError(f"not a phylogenetic network: {report.witness}", 0)
    return net


def parse(text: str) -> Union[PhyloTree, PhyloNetwork]:
    """A tree when the text has no reticulation tags, else a network."""
    if "#" in text:
        return parse_network(text)
    return parse_tree(text)


# ---------------------------------------------------------------------------
# writing


def serialize(obj: Union[PhyloTree, PhyloNetwork]) -> str:
    """Canonical (extended) Newick text; isomorphic inputs give identical text."""
    if isinstance(obj, PhyloTree):
        return obj.newick()
    if not obj.edges:
        (lab,) = obj.labels.values()
        return lab + ";"
    net = obj.relabelled()
    minleaf = {}
    for v in reversed(net.topological_order):
        if v in net.labels:
            minleaf[v] = net.labels[v]
        else:
            minleaf[v] = min(minleaf[c] for c in net.children[v])
    tags: dict[int, int] = {}
    out: list[str] = []
    # explicit stack of (vertex, phase) to avoid recursion depth issues
    stack: list = [("v", net.root)]
    while stack:
        kind, item = stack.pop()
        if kind == "s":
            out.append(item)
            continue
        v = item
        is_ret = len(net.parents[v]) >= 2
        if is_ret and v in tags:
            out.append(f"#H{tags[v]}")
            continue
        suffix = ""
        if is_ret:
            tags[v] = len(tags) + 1
            suffix = f"#H{tags[v]}"
        if v in net.labels:
            out.append(net.labels[v] + suffix)
            continue
        kids = sorted(net.children[v], key=lambda c: (minleaf[c], c))
        stack.append(("s", ")" + suffix))
        for i, c in enumerate(reversed(kids)):
            stack.append(("v", c))
            if i < len(kids) - 1:
                stack.append(("s", ","))
        stack.append(("s", "("))
    return "".join(out) + ";"


def read_any(source: str) -> Union[PhyloTree, PhyloNetwork]:
    """Parse ``source`` as literal Newick when it ends with ';', else as a file path."""
    text = source.strip()
    if not text.endswith(";"):
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read().strip()
        except OSError as exc:
            raise InputError(f"cannot read {source!r}: {exc.strerror}") from None
    return parse(text)
