"""dualminer: discover process models that support one event log and avoid another."""

from .dfg import Dfg, build_dfg, reachable
from .discovery import (
    Cut,
    DiscoveryParams,
    DiscoveryStats,
    base_case,
    cut_cost,
    dev_cost,
    discover,
    discover_with_stats,
    enumerate_cuts,
    find_optimal_cut,
    mis_cost,
    overall_cost,
    split_logs,
)
from .event_log import (
    ActivityPresence,
    AttributeEquals,
    CsvConfig,
    DurationOver,
    EventLog,
    Trace,
    log_from_text,
    log_to_text,
    parse_csv,
    parse_xes,
    project,
    split_by_predicate,
    write_xes,
)
from .process_tree import (
    Leaf,
    Node,
    Operator,
    ProcessTree,
    TAU,
    Tau,
    leaves,
    loop,
    par,
    parse_text,
    seq,
    simulate,
    to_text,
    xor,
)

__version__ = "0.1.0"
