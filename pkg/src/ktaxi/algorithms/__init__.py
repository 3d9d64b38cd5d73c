"""Online k-taxi algorithms behind one interface."""
from .base import Greedy, OnlineAlgorithm
from .baselines import DoubleCoverage
from .biased_dc import BiasedDC
from .flow import Flow, flow_expected_quantities, flow_probabilities, flow_serve
from .region_tracker import (RegionTracker, TrackerState, check_state, competitive_constant,
                             drift_margins, tracker_potentials)

REGISTRY = {cls.name: cls for cls in (Flow, BiasedDC, RegionTracker, DoubleCoverage, Greedy)}


def make_algorithm(name: str, **params) -> OnlineAlgorithm:
    try:
        cls = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(REGISTRY)}") from None
    return cls(**params)


__all__ = [
    "BiasedDC", "DoubleCoverage", "Flow", "Greedy", "OnlineAlgorithm", "REGISTRY", "RegionTracker",
    "TrackerState", "check_state", "competitive_constant", "drift_margins",
    "flow_expected_quantities", "flow_probabilities", "flow_serve", "make_algorithm",
    "tracker_potentials",
]
