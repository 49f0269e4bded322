"""Cost-driven recursive discovery over paired desirable/undesirable logs."""

from .cuts import (
    Cut,
    CutTypeSpec,
    CUT_TYPE_SPECS,
    DiscoveryParams,
    cut_cost,
    dev_cost,
    enumerate_cuts,
    find_optimal_cut,
    mis_cost,
    overall_cost,
)
from .recursion import DiscoveryStats, base_case, discover, discover_with_stats
from .splitting import split_logs

__all__ = [
    "Cut",
    "CutTypeSpec",
    "CUT_TYPE_SPECS",
    "DiscoveryParams",
    "DiscoveryStats",
    "base_case",
    "cut_cost",
    "dev_cost",
    "discover",
    "discover_with_stats",
    "enumerate_cuts",
    "find_optimal_cut",
    "mis_cost",
    "overall_cost",
    "split_logs",
]
