"""Metric spaces, HSTs, resistor networks and tree embeddings."""
from .embedding import EmbeddingError, embedding_distortion, frt_embed
from .hst import HstMetric, HstTree, binary_hst, random_hst, uniform_hst
from .io import load_metric, metric_from_dict, metric_to_dict, save_metric
from .network import ResistanceNetwork, steiner_tree
from .spaces import (EPS, ExplicitMetric, LineMetric, MetricError, MetricSpace,
                     VirtualPoint, check_triangle, distance, pairwise)

__all__ = [
    "EPS", "EmbeddingError", "ExplicitMetric", "HstMetric", "HstTree", "LineMetric",
    "MetricError", "MetricSpace", "ResistanceNetwork", "VirtualPoint", "binary_hst",
    "check_triangle", "distance", "embedding_distortion", "frt_embed", "load_metric",
    "metric_from_dict", "metric_to_dict", "pairwise", "random_hst", "save_metric",
    "steiner_tree", "uniform_hst",
]
