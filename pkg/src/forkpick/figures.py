"""Worked example pairs shipped with the package (``data/figures.json``)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from .forkops import ForkPickingSequence
from .model import InputError, PhyloNetwork, PhyloTree
from .newick import parse_network, parse_tree


@dataclass(frozen=True)
class Example:
    name: str
    t: PhyloTree
    t_prime: PhyloTree
    network: Optional[PhyloNetwork]
    sequence: Optional[ForkPickingSequence]
    extra: dict

    @property
    def trees(self) -> tuple[PhyloTree, PhyloTree]:
        return self.t, self.t_prime


@lru_cache(maxsize=None)
def _raw() -> dict:
    text = resources.files("forkpick.data").joinpath("figures.json").read_text()
    return json.loads(text)


def names() -> list[str]:
    return sorted(k for k in _raw() if k != "description")


def example(name: str) -> Example:
    raw = _raw().get(name)
    if raw is None or name == "description":
        raise InputError(f"no example named {name!r}; known: {', '.join(names())}")
    net = parse_network(raw["network"]) if "network" in raw else None
    seq = ForkPickingSequence.from_json(raw["sequence"]) if "sequence" in raw else None
    extra = {k: v for k, v in raw.items() if k not in ("t", "t_prime", "network", "sequence")}
    return Example(name, parse_tree(raw["t"]), parse_tree(raw["t_prime"]), net, seq, extra)
