"""Bridges to neighbouring problems: layered graph traversal through a hard
k-taxi algorithm, and easy k-taxi through a k-server algorithm."""
from .easy import EasyRun, easy_taxi_from_kserver, segment_points
from .lgt import (FixedLayers, LayeredTree, LayeredTreeError, LgtRun, RandomLayers, UnitTreeMetric,
                  lgt_offline_opt, load_layered_tree, save_layered_tree, traverse_layered_tree)

__all__ = [
    "EasyRun", "easy_taxi_from_kserver", "segment_points",
    "LayeredTree", "LayeredTreeError", "UnitTreeMetric", "FixedLayers", "RandomLayers", "LgtRun",
    "traverse_layered_tree", "lgt_offline_opt", "load_layered_tree", "save_layered_tree",
]
