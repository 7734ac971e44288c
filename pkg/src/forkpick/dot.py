"""Graphviz DOT text for trees and networks."""
from __future__ import annotations

from typing import Union

from .model import PhyloNetwork, PhyloTree
from .netcheck import temporal_labelling

RETIC_COLOR = "firebrick"


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(obj: Union[PhyloTree, PhyloNetwork], name: str = "G") -> str:
    """DOT digraph; reticulations are coloured and, when the network is
    temporal, vertices carry their time and share a rank with equal times."""
    net = PhyloNetwork.from_tree(obj) if isinstance(obj, PhyloTree) else obj
    net = net.relabelled() if net.edges else net
    times = temporal_labelling(net) if net.edges else None
    rets = set(net.reticulations)
    lines = [f"digraph {_quote(name)} {{", "  node [shape=point];"]
    for v in net.vertices:
        attrs = []
        if v in net.labels:
            attrs += ["shape=plaintext", f"label={_quote(net.labels[v])}"]
        elif v in rets:
            attrs += ["shape=circle", "width=0.15", "label=\"\"", f"color={RETIC_COLOR}",
                      "style=filled", f"fillcolor={RETIC_COLOR}"]
        if times is not None and v not in net.labels:
            attrs.append(f"xlabel={_quote('t=' + str(times[v]))}")
        lines.append(f"  v{v} [{', '.join(attrs)}];" if attrs else f"  v{v};")
    for u, v in net.edges:
        style = f" [color={RETIC_COLOR}]" if v in rets else ""
        lines.append(f"  v{u} -> v{v}{style};")
    if times is not None:
        by_time: dict[int, list] = {}
        for v in net.vertices:
            if v not in net.labels:
                by_time.setdefault(times[v], []).append(v)
        for t in sorted(by_time):
            if len(by_time[t]) > 1:
                members = "; ".join(f"v{v}" for v in by_time[t])
                lines.append(f"  {{ rank=same; {members}; }}")
    lines.append("}")
    return "\n".join(lines) + "\n"
