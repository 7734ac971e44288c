"""Exact computation of rigid, temporal and weak hybrid numbers for pairs of
rooted binary phylogenetic trees."""

from .model import (InputError, PhyloNetwork, PhyloTree, canonical_form, cherries,
                    isomorphic, lca, pendant_subnetworks, restrict)
from .newick import ParseError, parse, parse_network, parse_tree, serialize

__all__ = [
    "InputError", "ParseError", "PhyloNetwork", "PhyloTree", "canonical_form", "cherries",
    "isomorphic", "lca", "parse", "parse_network", "parse_tree", "pendant_subnetworks",
    "restrict", "serialize",
]
