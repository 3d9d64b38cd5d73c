"""Request generators: the adaptive binary-HST adversary, memoryless stress
sequences, and random baselines."""
from .binhst import BinHstAdversary, Ledger, replay_ledger
from .notation import concat, mirror_config, mirror_leaf, relocation_batch, repeat, simple_batch
from .random import random_line_requests, random_requests
from .stress import ConditionedAlgorithm, StressParams, StressResult, memoryless_stress_sequence

__all__ = [
    "BinHstAdversary", "Ledger", "replay_ledger",
    "concat", "repeat", "simple_batch", "relocation_batch", "mirror_leaf", "mirror_config",
    "random_requests", "random_line_requests",
    "ConditionedAlgorithm", "StressParams", "StressResult", "memoryless_stress_sequence",
]
