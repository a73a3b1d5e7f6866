from .graph import GRAPH_FEATURE_GROUPS, GraphNode, KnowledgeGraph, build_graph
from .reasoning import (
    AnomalyReport,
    BaselineTracker,
    ReadoutConfig,
    detect_anomalies,
    message_pass,
    score_nodes,
)
from .intents import INTENT_KINDS, Intent, IntentRuleTable, derive_intents

__all__ = [
    "GRAPH_FEATURE_GROUPS",
    "GraphNode",
    "KnowledgeGraph",
    "build_graph",
    "AnomalyReport",
    "BaselineTracker",
    "ReadoutConfig",
    "detect_anomalies",
    "message_pass",
    "score_nodes",
    "INTENT_KINDS",
    "Intent",
    "IntentRuleTable",
    "derive_intents",
]
